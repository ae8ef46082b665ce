use std::time::Instant;

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use opindex::domination::{domination_constant, operator_norm, Bound, Method};
use opindex::exact::{int, rat, to_f64, Exponent, Rational, Real};
use opindex::families::{
    cb_index_restricted, gasparis_prefix_search, iota_symbolic, is_spreading_restricted, member_expr, restrict,
    validate_prefix, FamilyExpr, FinSet, PrefixSearch,
};
use opindex::indices::{
    np_depth_probe, np_member, spreading_model_certificate, summing_chain, wc_member, Certificate, ImpossibleReason,
    ProbeConfig,
};
use opindex::linalg;
use opindex::ordinal::Ordinal;
use opindex::spaces::{norm, w_space_approx, FinVector, NormDescriptor, OperatorMatrix, DEFAULT_DIMENSION_BUDGET};
use opindex::trees::{FiniteTree, LazyTree};

use crate::oracles::{self, FastNorm, PolyNorm};
use crate::{Check, Outcome};

const SEED: u64 = 0x0dd5_eed5;

fn rng(stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(SEED ^ stream)
}

/// Collects the checks of one criterion and stops the clock.
struct Run {
    start: Instant,
    checks: Vec<Check>,
}

impl Run {
    fn new() -> Self {
        Run { start: Instant::now(), checks: Vec::new() }
    }

    fn check(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check { name: name.into(), passed, detail: detail.into() });
    }

    fn finish(self, id: u8, title: &'static str, limit_ms: u128) -> Outcome {
        Outcome { id, title, checks: self.checks, elapsed_ms: self.start.elapsed().as_millis(), limit_ms }
    }
}

fn desc(s: &str) -> NormDescriptor {
    s.parse().expect("descriptor literal")
}

fn fam(s: &str) -> FamilyExpr {
    s.parse().expect("family literal")
}

fn basis(n: usize) -> Vec<FinVector> {
    (0..n).map(|i| FinVector::unit(n, i)).collect()
}

/// Does the interval contain `sqrt(sq)`, with width at most `width`?
fn brackets_root(r: &Real, sq: f64, width: f64) -> bool {
    let (lo, hi) = (to_f64(r.lo()), to_f64(r.hi()));
    lo * lo <= sq * (1.0 + 1e-12) && sq <= hi * hi * (1.0 + 1e-12) && hi - lo <= width
}

fn to_f64_vec(v: &FinVector) -> Vec<f64> {
    v.coords().iter().map(to_f64).collect()
}

// ---------------------------------------------------------------------------
// 1, 2: ordinals

fn random_below_omega_omega(r: &mut ChaCha8Rng) -> Ordinal {
    let top = r.gen_range(0..4u64);
    let terms: Vec<(Ordinal, u64)> =
        (0..=top).rev().filter_map(|e| Some(r.gen_range(0..4u64)).filter(|&c| c > 0).map(|c| (Ordinal::from(e), c))).collect();
    Ordinal::from_terms(terms).expect("decreasing exponents")
}

pub fn ordinal_laws() -> Outcome {
    let mut run = Run::new();
    let mut r = rng(1);
    let mut failures: [Vec<String>; 5] = Default::default();
    let names = ["add associative", "mul associative", "left distributive", "omega powers", "right monotone"];
    for _ in 0..10_000 {
        let (a, b, c) = (random_below_omega_omega(&mut r), random_below_omega_omega(&mut r), random_below_omega_omega(&mut r));
        let mut note = |k: usize, ok: bool| {
            if !ok && failures[k].len() < 3 {
                failures[k].push(format!("({a}, {b}, {c})"));
            }
        };
        note(0, &(&a + &b) + &c == &a + &(&b + &c));
        note(1, &(&a * &b) * &c == &a * &(&b * &c));
        note(2, &a * &(&b + &c) == &(&a * &b) + &(&a * &c));
        note(3, &Ordinal::omega_pow(a.clone()) * &Ordinal::omega_pow(b.clone()) == Ordinal::omega_pow(&a + &b));
        let (lo, hi) = if b < c { (&b, &c) } else { (&c, &b) };
        if lo != hi {
            note(4, &a + lo < &a + hi && (a.is_zero() || &a * lo < &a * hi));
        }
    }
    for (k, name) in names.iter().enumerate() {
        run.check(*name, failures[k].is_empty(), format!("10000 triples; counterexamples {:?}", failures[k]));
    }
    run.finish(1, "ordinal laws on random CNF triples below w^w", 5_000)
}

pub fn order_type_oracle() -> Outcome {
    let mut run = Run::new();
    let mut all = Vec::new();
    for c2 in 0..=5u64 {
        for c1 in 0..=5u64 {
            for c0 in 0..=5u64 {
                let terms: Vec<(Ordinal, u64)> =
                    [(2, c2), (1, c1), (0, c0)].into_iter().filter(|&(_, c)| c > 0).map(|(e, c)| (Ordinal::from(e), c)).collect();
                all.push(Ordinal::from_terms(terms).expect("canonical"));
            }
        }
    }
    let words: Vec<oracles::BlockWord> = all.iter().map(|a| oracles::word_of(a).expect("below w^w")).collect();
    let (mut add_bad, mut mul_bad) = (Vec::new(), Vec::new());
    for (a, wa) in all.iter().zip(&words) {
        for (b, wb) in all.iter().zip(&words) {
            if a + b != oracles::order_type(&oracles::concat(wa, wb)) && add_bad.len() < 3 {
                add_bad.push(format!("{a} + {b}"));
            }
            if a * b != oracles::order_type(&oracles::product(wa, wb)) && mul_bad.len() < 3 {
                mul_bad.push(format!("{a} * {b}"));
            }
        }
    }
    let pairs = all.len() * all.len();
    run.check("addition", add_bad.is_empty(), format!("{pairs} pairs; mismatches {add_bad:?}"));
    run.check("multiplication", mul_bad.is_empty(), format!("{pairs} pairs; mismatches {mul_bad:?}"));
    run.finish(2, "order-type oracle below w^3, coefficients <= 5", 30_000)
}

// ---------------------------------------------------------------------------
// 3, 4: trees

pub fn minimal_tree_ranks() -> Outcome {
    let mut run = Run::new();
    let mut bad = Vec::new();
    for xi in 0..=12u64 {
        let t = LazyTree::minimal_tree(Ordinal::from(xi)).materialize(1 << 16).expect("finite chain");
        let h = oracles::height(t.nodes().cloned());
        if t.rank() != Ordinal::from(xi) || h as u64 != xi {
            bad.push(format!("xi={xi}: rank {}, height {h}", t.rank()));
        }
    }
    run.check("rank(T_xi) = xi, xi <= 12", bad.is_empty(), format!("{bad:?}"));
    let mut bad = Vec::new();
    for n in 1..=10u64 {
        let t = LazyTree::truncated_minimal_tree(Ordinal::omega(), n).materialize(1 << 16).expect("finite truncation");
        let labels_ok = t.nodes().all(|s| s[0].as_finite().is_some_and(|l| (1..=n).contains(&l)));
        let h = oracles::height(t.nodes().cloned());
        if t.rank() != Ordinal::from(n) || h as u64 != n || !labels_ok {
            bad.push(format!("n={n}: rank {}, height {h}", t.rank()));
        }
    }
    run.check("truncations of T_w to labels <= n have rank n, n <= 10", bad.is_empty(), format!("{bad:?}"));
    run.finish(3, "minimal tree ranks", 5_000)
}

fn random_tree(r: &mut ChaCha8Rng, max: usize) -> FiniteTree<u8> {
    let mut nodes: Vec<Vec<u8>> = vec![Vec::new()];
    let steps = r.gen_range(0..max);
    for _ in 0..steps {
        let mut s = nodes[r.gen_range(0..nodes.len())].clone();
        s.push(r.gen_range(0..4));
        if !nodes.contains(&s) {
            nodes.push(s);
        }
    }
    FiniteTree::new(nodes, true).expect("closed under prefixes")
}

pub fn derivative_identities() -> Outcome {
    let mut run = Run::new();
    let mut r = rng(4);
    let (mut compose_bad, mut subtree_bad) = (Vec::new(), Vec::new());
    let (mut compose_n, mut subtree_n) = (0usize, 0usize);
    for i in 0..500 {
        let t = random_tree(&mut r, 120);
        let rank = t.rank_by_derivative();
        let derived: Vec<FiniteTree<u8>> = (0..=rank).map(|k| t.derived(k)).collect();
        for z in 0..=rank {
            for x in 0..=rank - z {
                compose_n += 1;
                if derived[z].derived(x) != derived[z + x] && compose_bad.len() < 3 {
                    compose_bad.push(format!("tree {i}: zeta={z} xi={x}"));
                }
            }
        }
        for s in t.nodes() {
            let sub = t.subtree(s);
            for (x, dx) in derived.iter().enumerate() {
                subtree_n += 1;
                if dx.subtree(s) != sub.derived(x) && subtree_bad.len() < 3 {
                    subtree_bad.push(format!("tree {i}: node {s:?} xi={x}"));
                }
            }
        }
    }
    run.check("(T^zeta)^xi = T^(zeta+xi)", compose_bad.is_empty(), format!("{compose_n} cases; {compose_bad:?}"));
    run.check("(T^xi)(t) = (T(t))^xi", subtree_bad.is_empty(), format!("{subtree_n} cases; {subtree_bad:?}"));
    run.finish(4, "derivative identities on 500 random trees", 20_000)
}

// ---------------------------------------------------------------------------
// 5, 6, 7: families

fn cb(f: &FamilyExpr, n: u32) -> usize {
    cb_index_restricted(&restrict(f, n).expect("small ground set"))
}

pub fn family_index_convergence() -> Outcome {
    let mut run = Run::new();
    let mut bad = Vec::new();
    for k in 1..=6u32 {
        for n in k..=16 {
            let c = cb(&FamilyExpr::Ak(k), n);
            if c != k as usize {
                bad.push(format!("A({k}), n={n}: {c}"));
            }
        }
    }
    run.check("cb(A_k, n) = k", bad.is_empty(), format!("1 <= k <= 6, k <= n <= 16; {bad:?}"));
    let f = fam("A(2)[A(3)]");
    let values: Vec<usize> = (6..=16).map(|n| cb(&f, n)).collect();
    let iota = iota_symbolic(&f).ok().and_then(|o| o.as_finite());
    run.check(
        "cb(A_2[A_3], n) = 6 = iota",
        values.iter().all(|&c| c == 6) && iota == Some(6),
        format!("n = 6..16: {values:?}; iota {iota:?}"),
    );
    let s1 = FamilyExpr::schreier(Ordinal::one());
    let values: Vec<usize> = (2..=16).map(|n| cb(&s1, n)).collect();
    let strict = values.windows(2).all(|w| w[0] < w[1]);
    run.check("cb(S_1, n) strictly increasing, 2 <= n <= 16", strict, format!("{values:?}"));
    run.finish(5, "family index convergence", 60_000)
}

pub fn spreading_and_hereditary() -> Outcome {
    let mut run = Run::new();
    let n = 12u32;
    let mut exprs = vec!["S0", "S(1)", "S(2)", "A(2)[S(1)]", "S(1)[A(2)]"];
    let aks: Vec<String> = (1..=6).map(|k| format!("A({k})")).collect();
    exprs.extend(aks.iter().map(String::as_str));
    for e in exprs {
        let f = fam(e);
        let r = restrict(&f, n).expect("n = 12");
        let members: Vec<u32> = r.sets().iter().map(FinSet::to_mask).collect();
        let is_member = |m: u32| r.contains(&FinSet::from_mask(m));
        // Every subset, and every pointwise-larger set of the same size.
        let mut missing = None;
        'outer: for &m in &members {
            let mut sub = m;
            while sub != 0 {
                sub = (sub - 1) & m;
                if !is_member(sub) {
                    missing = Some(format!("subset {} of {}", FinSet::from_mask(sub), FinSet::from_mask(m)));
                    break 'outer;
                }
            }
            let e = FinSet::from_mask(m);
            for cand in 0u32..1 << n {
                if cand.count_ones() != m.count_ones() {
                    continue;
                }
                let c = FinSet::from_mask(cand);
                if c.elems().iter().zip(e.elems()).all(|(a, b)| a >= b) && !is_member(cand) {
                    missing = Some(format!("spread {c} of {e}"));
                    break 'outer;
                }
            }
        }
        let lib = r.is_hereditary() && is_spreading_restricted(&r).is_ok();
        run.check(
            format!("{e} restricted to {{1..12}}"),
            missing.is_none() && lib,
            format!("{} members; {}", members.len(), missing.unwrap_or_else(|| "closed".into())),
        );
    }
    run.finish(6, "spreading and hereditary restrictions", 60_000)
}

/// Independent re-check of a prefix: every `E ∈ F ∩ P({1..d})` maps into `G`,
/// membership in `G` decided by direct recursion.
fn revalidate_into_schreier(f: &FamilyExpr, k: u32, prefix: &[u32]) -> bool {
    let r = restrict(f, prefix.len() as u32).expect("small");
    r.sets().iter().all(|e| {
        let img: Vec<u32> = e.elems().iter().map(|&i| prefix[i as usize - 1]).collect();
        oracles::schreier_member(k, &img)
    })
}

pub fn gasparis_search() -> Outcome {
    let mut run = Run::new();
    let a3 = FamilyExpr::Ak(3);
    let s1 = FamilyExpr::schreier(Ordinal::one());
    let res = gasparis_prefix_search(&a3, &s1, 5, 30, 1_000_000);
    let ok = match &res {
        Ok(PrefixSearch::Found(p)) => {
            *p == vec![3, 4, 5, 6, 7] && validate_prefix(&a3, &s1, p).unwrap_or(false) && revalidate_into_schreier(&a3, 1, p)
        }
        _ => false,
    };
    run.check("(A_3, S_1) depth 5 yields (3,4,5,6,7)", ok, format!("{res:?}"));
    let a2 = FamilyExpr::Ak(2);
    let res = gasparis_prefix_search(&s1, &a2, 3, 30, 1_000_000);
    // Independent view: at depth 3 the members of S_1 have at most two elements.
    let largest = oracles::subsets(3).into_iter().filter(|e| oracles::schreier_member(1, e)).map(|e| e.len()).max();
    run.check(
        "(S_1, A_2) depth 3 cap 30 yields NotFound",
        matches!(res, Ok(PrefixSearch::NotFound)),
        format!("{res:?}; largest S_1 member inside {{1,2,3}} has {largest:?} elements"),
    );
    let deeper = gasparis_prefix_search(&s1, &a2, 5, 30, 1_000_000);
    let img_ok = |p: &[u32]| {
        restrict(&s1, p.len() as u32).expect("small").sets().iter().all(|e| {
            let img: Vec<u32> = e.elems().iter().map(|&i| p[i as usize - 1]).collect();
            member_expr(&a2, &FinSet::new(img).expect("increasing"))
        })
    };
    let consistent = match &deeper {
        Ok(PrefixSearch::NotFound) => true,
        Ok(PrefixSearch::Found(p)) => img_ok(p),
        Err(_) => false,
    };
    run.check("(S_1, A_2) at depth 5, where {3,4,5} enters S_1", consistent, format!("{deeper:?}"));
    run.finish(7, "Gasparis prefix search", 10_000)
}

// ---------------------------------------------------------------------------
// 8: norms

pub fn norm_oracles() -> Outcome {
    let mut run = Run::new();
    let width = 1e-9;
    let v = |s: &str| -> FinVector { s.parse().expect("vector literal") };
    let exact = |d: &str, x: &FinVector| norm(&desc(d), x).ok().and_then(|r| r.as_exact().cloned());

    let ones = v("[1,1,1,1]");
    let got = exact("schreier(1,4)", &ones);
    let want = oracles::schreier_norm(1, &to_f64_vec(&ones));
    run.check("schreier(1,4) on (1,1,1,1)", got == Some(int(2)) && want == 2.0, format!("engine {got:?}, enumeration {want}"));

    let pair = v("[0,1,1,0]");
    let got = norm(&desc("xxi2(1,4)"), &pair).expect("dims");
    let sq = oracles::xxi2_norm_sq(1, &to_f64_vec(&pair));
    run.check("xxi2(1,4) on 1_{2,3}", brackets_root(&got, sq, width) && sq == 4.0, format!("engine {got}, enumeration sqrt({sq})"));

    let chain: Vec<Vec<u32>> = (0..4).map(|k| vec![0; k]).collect();
    let z = NormDescriptor::zpq(int(1), int(2), chain.clone()).expect("tree");
    let got = norm(&z, &v("[1,1,1,1]")).expect("dims");
    let sq = oracles::z12_norm_sq(&chain, &[1.0; 4]);
    run.check("z(1,2) on a chain of 4", brackets_root(&got, sq, width) && sq == 16.0, format!("engine {got}, enumeration sqrt({sq})"));

    let star: Vec<Vec<u32>> = vec![vec![], vec![0], vec![1], vec![2], vec![3]];
    let z = NormDescriptor::zpq(int(1), int(2), star.clone()).expect("tree");
    let x = [0.0, 1.0, 1.0, 1.0, 1.0];
    let got = norm(&z, &v("[0,1,1,1,1]")).expect("dims");
    let sq = oracles::z12_norm_sq(&star, &x);
    run.check("z(1,2) on 4 incomparable nodes", brackets_root(&got, sq, width) && sq == 4.0, format!("engine {got}, enumeration sqrt({sq})"));

    let s = v("[1,-1,1]");
    let got = exact("summing(3)", &s);
    let want = oracles::summing_norm(&to_f64_vec(&s));
    run.check("summing(3) on (1,-1,1)", got == Some(int(1)) && want == 1.0, format!("engine {got:?}, partial sums {want}"));

    let got = norm(&desc("conv(lp(1,2),2)"), &v("[3,4]")).expect("dims");
    run.check("conv(lp(1,2),2) on (3,4)", brackets_root(&got, 25.0, width), format!("engine {got}, sqrt(9 + 16)"));

    let got = norm(&desc("lp(2,2)"), &v("[3,4]")).expect("dims");
    run.check("lp(2,2) on (3,4)", brackets_root(&got, 25.0, width), format!("engine {got}"));

    let got = norm(&desc("dsum(lp(2,2); lp(1,2), lp(1,2))"), &v("[1,1,0,0]")).expect("dims");
    run.check("dsum(lp(2,2); lp(1,2), lp(1,2)) on ((1,1),(0,0))", brackets_root(&got, 4.0, width), format!("engine {got}"));

    // The same enumerations on random vectors.
    let mut r = rng(8);
    let mut bad = Vec::new();
    for _ in 0..40 {
        let x: Vec<Rational> = (0..6).map(|_| rat(r.gen_range(-8..=8), r.gen_range(1..=4))).collect();
        let xf: Vec<f64> = x.iter().map(to_f64).collect();
        let fv = FinVector::new(x);
        for k in 0..3u32 {
            let s = norm(&desc(&format!("schreier({k},6)")), &fv).expect("dims");
            let want = oracles::schreier_norm(k, &xf);
            if (to_f64(s.lo()) - want).abs() > 1e-12 || s.as_exact().is_none() {
                bad.push(format!("schreier({k}) {fv}"));
            }
            let t = norm(&desc(&format!("xxi2({k},6)")), &fv).expect("dims");
            if !brackets_root(&t, oracles::xxi2_norm_sq(k, &xf), width) {
                bad.push(format!("xxi2({k}) {fv}"));
            }
        }
        let nodes: Vec<Vec<u32>> = vec![vec![], vec![0], vec![0, 0], vec![0, 1], vec![1], vec![1, 0]];
        let z = NormDescriptor::zpq(int(1), int(2), nodes.clone()).expect("tree");
        if !brackets_root(&norm(&z, &fv).expect("dims"), oracles::z12_norm_sq(&nodes, &xf), width) {
            bad.push(format!("z(1,2) {fv}"));
        }
        let sm = norm(&desc("summing(6)"), &fv).expect("dims");
        if (to_f64(sm.lo()) - oracles::summing_norm(&xf)).abs() > 1e-12 {
            bad.push(format!("summing {fv}"));
        }
    }
    run.check("random vectors against enumeration", bad.is_empty(), format!("40 vectors; {bad:?}"));
    run.finish(8, "norm engine against exhaustive enumeration", 30_000)
}

// ---------------------------------------------------------------------------
// 9: domination

fn random_system(r: &mut ChaCha8Rng, n: usize) -> Vec<FinVector> {
    (0..n).map(|_| FinVector::from_ints(&(0..n).map(|_| r.gen_range(-2..=2)).collect::<Vec<i64>>())).collect()
}

pub fn domination_exactness() -> Outcome {
    let mut run = Run::new();
    let mut r = rng(9);
    let steps = 64i64;
    let mut instances = 0;
    let mut bad = Vec::new();
    let mut infinite = 0;
    for n in 1..=4usize {
        let random_count = if n == 4 { 1 } else { 3 };
        for &xk in &PolyNorm::ALL {
            for &yk in &PolyNorm::ALL {
                let mut systems = vec![(basis(n), basis(n))];
                for _ in 0..random_count {
                    systems.push((random_system(&mut r, n), random_system(&mut r, n)));
                }
                let (xd, yd) = (desc(&xk.descriptor(n)), desc(&yk.descriptor(n)));
                let (xf, yf) = (FastNorm::new(xk, n), FastNorm::new(yk, n));
                for (xs, ys) in systems {
                    instances += 1;
                    let label = format!("{xd} vs {yd}, x={xs:?}, y={ys:?}");
                    let rep = match domination_constant(&xs, &xd, &ys, &yd) {
                        Ok(rep) => rep,
                        Err(e) => {
                            bad.push(format!("{label}: {e}"));
                            continue;
                        }
                    };
                    if !rep.exact || !matches!(rep.method, Method::Vertex | Method::Kernel | Method::Trivial) {
                        bad.push(format!("{label}: not exact ({:?})", rep.method));
                        continue;
                    }
                    let xv: Vec<Vec<f64>> = xs.iter().map(to_f64_vec).collect();
                    let yv: Vec<Vec<f64>> = ys.iter().map(to_f64_vec).collect();
                    let k = match &rep.upper {
                        Bound::Infinite => {
                            infinite += 1;
                            let w: Vec<f64> = rep.witness.iter().map(to_f64).collect();
                            let (mut bx, mut by) = (vec![0.0; n], vec![0.0; n]);
                            oracles::combine(&xv, &w, &mut bx);
                            oracles::combine(&yv, &w, &mut by);
                            if yf.eval(&by) != 0.0 || xf.eval(&bx) == 0.0 {
                                bad.push(format!("{label}: kernel witness does not separate"));
                            }
                            continue;
                        }
                        Bound::Finite(k) => to_f64(k),
                    };
                    let g = oracles::grid_max(&xv, &xf, &yv, &yf, steps);
                    // Rounding the witness (scaled to sup norm 1) to the grid
                    // moves each side by at most half a step times its Lipschitz constant.
                    let w: Vec<f64> = rep.witness.iter().map(to_f64).collect();
                    let sup = w.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                    let (mut bx, mut by) = (vec![0.0; n], vec![0.0; n]);
                    let ws: Vec<f64> = w.iter().map(|v| v / sup).collect();
                    oracles::combine(&xv, &ws, &mut bx);
                    oracles::combine(&yv, &ws, &mut by);
                    let half = 0.5 / steps as f64;
                    let floor = (xf.eval(&bx) - oracles::lipschitz(&xv, &xf) * half).max(0.0)
                        / (yf.eval(&by) + oracles::lipschitz(&yv, &yf) * half);
                    if g > k * (1.0 + 1e-12) || g < floor * (1.0 - 1e-12) {
                        bad.push(format!("{label}: vertex {k}, grid {g}, grid floor {floor}"));
                    }
                }
            }
        }
    }
    run.check(
        "vertex enumeration agrees with the 1/64 grid",
        bad.is_empty(),
        format!("{instances} instances ({infinite} infinite); {:?}", bad.iter().take(3).collect::<Vec<_>>()),
    );
    let rep = domination_constant(&basis(2), &desc("lp(1,2)"), &basis(2), &desc("lp(2,2)"));
    let ok = rep.as_ref().is_ok_and(|rep| {
        matches!((&rep.lower, &rep.upper), (Bound::Finite(lo), Bound::Finite(hi))
            if lo * lo <= int(2) && int(2) <= hi * hi && to_f64(&(hi - lo)) <= 1e-9)
    });
    let shown = rep.map(|r| format!("[{}, {}]", r.lower, r.upper)).unwrap_or_else(|e| e.to_string());
    run.check("l1 by l2 basis constant is sqrt 2", ok, shown);
    run.finish(9, "domination exactness on polyhedral systems", 120_000)
}

// ---------------------------------------------------------------------------
// 10, 11, 12: indices

fn l1_operator(entries: Vec<Vec<Rational>>) -> OperatorMatrix {
    let (rows, cols) = (entries.len(), entries[0].len());
    let lp = |n| NormDescriptor::lp(Exponent::one(), n).expect("dimension");
    OperatorMatrix::new(entries, lp(cols), lp(rows)).expect("shape")
}

fn random_matrix(r: &mut ChaCha8Rng, rows: usize, cols: usize, span: i64) -> Vec<Vec<Rational>> {
    (0..rows).map(|_| (0..cols).map(|_| int(r.gen_range(-span..=span))).collect()).collect()
}

fn exact_norm(a: &OperatorMatrix) -> Option<Rational> {
    let rep = operator_norm(a).ok()?;
    match (rep.exact, rep.upper) {
        (true, Bound::Finite(k)) => Some(k),
        _ => None,
    }
}

pub fn finite_rank_index() -> Outcome {
    let mut run = Run::new();
    let mut r = rng(10);
    let mut bad = Vec::new();
    let mut by_rank = [0usize; 3];
    for i in 0..200 {
        let rank = 1 + i % 3;
        let a = loop {
            let (m, n) = (r.gen_range(rank..=5), r.gen_range(rank..=5));
            let b = random_matrix(&mut r, m, rank, 2);
            let c = random_matrix(&mut r, rank, n, 2);
            let a = linalg::mat_mul(&b, &c);
            if linalg::rank(&a) == rank {
                break l1_operator(a);
            }
        };
        by_rank[rank - 1] += 1;
        let cfg = ProbeConfig::new(int(10_000), Exponent::one(), &a.domain).expect("config");
        let ok = match np_depth_probe(&a, &cfg) {
            Ok(rep) => {
                rep.witnessed_depth == rank
                    && rep.impossible_beyond == Some(rank + 1)
                    && rep.reason == Some(ImpossibleReason::RankBound)
                    && rep.finite_index_claim == Some(1 + rank)
                    && np_member(&a, &cfg, &rep.witness).is_ok_and(|v| v.holds())
            }
            Err(_) => false,
        };
        if !ok && bad.len() < 3 {
            bad.push(format!("rank {rank}: {:?}", a.entries));
        }
    }
    run.check(
        "index = 1 + rank certified",
        bad.is_empty(),
        format!("ranks 1/2/3: {by_rank:?}; failures {bad:?}"),
    );
    run.finish(10, "finite-rank index theorem", 60_000)
}

pub fn perturbation_stability() -> Outcome {
    let mut run = Run::new();
    let mut r = rng(11);
    let mut bad = Vec::new();
    let mut done = 0;
    while done < 100 {
        let (m, n) = (r.gen_range(2..=3), r.gen_range(2..=3));
        let a = l1_operator(random_matrix(&mut r, m, n, 3));
        let k = r.gen_range(1..=4i64);
        let cfg = ProbeConfig::new(int(k), Exponent::one(), &a.domain).expect("config");
        let Ok(rep) = np_depth_probe(&a, &cfg) else {
            bad.push(format!("probe failed on {:?}", a.entries));
            done += 1;
            continue;
        };
        if rep.witnessed_depth == 0 {
            continue;
        }
        let e = l1_operator(random_matrix(&mut r, m, n, 5));
        let Some(en) = exact_norm(&e) else { continue };
        if en.is_zero() {
            continue;
        }
        // ‖A - B‖ = t / 2K for a random t in (0, 1).
        let t = rat(r.gen_range(1..=99), 100);
        let s = &t / (int(2 * k) * &en);
        let b = OperatorMatrix::new(
            a.entries.iter().zip(&e.entries).map(|(ra, re)| ra.iter().zip(re).map(|(x, y)| x + y * &s).collect()).collect(),
            a.domain.clone(),
            a.codomain.clone(),
        )
        .expect("shape");
        let dist = exact_norm(&a.sub(&b));
        let mut doubled = cfg.clone();
        doubled.k = int(2 * k);
        let holds = np_member(&b, &doubled, &rep.witness).is_ok_and(|v| v.holds());
        done += 1;
        if dist.as_ref().is_none_or(|d| *d >= rat(1, 2 * k)) || !holds {
            bad.push(format!("A={:?} K={k} t={t}", a.entries));
        }
    }
    run.check("witness chains survive |A-B| < 1/2K at 2K", bad.is_empty(), format!("100 instances; {bad:?}"));
    run.finish(11, "perturbation stability", 60_000)
}

pub fn spreading_certificates() -> Outcome {
    let mut run = Run::new();
    let one = Rational::one();
    let mut bad = Vec::new();
    for n in 1..=10 {
        let s = NormDescriptor::schreier(Ordinal::one(), n).expect("dimension");
        match spreading_model_certificate(&basis(n), &s, &Exponent::one(), &Ordinal::one(), &one, &one) {
            Ok(c) if c.passed() => {}
            other => bad.push(format!("n={n}: {other:?}")),
        }
    }
    run.check("Schreier basis passes the l1 certificate, n <= 10", bad.is_empty(), format!("{bad:?}"));
    let linf = desc("lp(inf,8)");
    let res = spreading_model_certificate(&basis(8), &linf, &Exponent::one(), &Ordinal::one(), &one, &one);
    let ok = matches!(&res, Ok(Certificate::Fail { set, .. }) if set.elems() == [2, 3]);
    run.check("l_inf basis fails at E = {2,3}", ok, format!("{res:?}"));
    let mut bad = Vec::new();
    for n in 1..=8 {
        let id = OperatorMatrix::identity(NormDescriptor::lp(Exponent::Infinity, n).expect("dimension"));
        if !wc_member(&id, &one, &summing_chain(n)).is_ok_and(|v| v.holds()) {
            bad.push(n);
        }
    }
    run.check("summing chain passes wcMember at K = 1, depth <= 8", bad.is_empty(), format!("failing depths {bad:?}"));
    run.finish(12, "spreading-model certificates", 30_000)
}

// ---------------------------------------------------------------------------
// 13: W_ξ

pub fn w_space_truncation() -> Outcome {
    let mut run = Run::new();
    let ws = w_space_approx(&Ordinal::one(), 3, DEFAULT_DIMENSION_BUDGET);
    let Ok(ws) = ws else {
        run.check("build W_1 with 3 summands", false, format!("{ws:?}"));
        return run.finish(13, "W_xi truncation", 10_000);
    };
    run.check("dimension 1 + 2 + 3", ws.w.dim() == 6, format!("{}", ws.w));
    let mut r = rng(13);
    let mut bad = Vec::new();
    for _ in 0..50 {
        let x: Vec<Rational> = (0..6).map(|_| rat(r.gen_range(-9..=9), r.gen_range(1..=5))).collect();
        // Z_1 = K, Z_2 = K ⊕₁ Z_1, Z_3 = K ⊕₁ Z_2, then the ℓ₂ sum of Z_1, Z_2, Z_3.
        let blocks = [&x[0..1], &x[1..3], &x[3..6]];
        let sq = blocks.iter().fold(Rational::zero(), |acc, b| {
            let l1 = b.iter().fold(Rational::zero(), |s, v| s + v.abs());
            acc + &l1 * &l1
        });
        let got = norm(&ws.w, &FinVector::new(x.clone())).expect("dims");
        if !(got.lo() * got.lo() <= sq && sq <= got.hi() * got.hi()) || to_f64(&got.width()) > 1e-9 {
            bad.push(format!("{x:?}"));
        }
    }
    run.check("norms equal the nested l1/l2 compositions", bad.is_empty(), format!("50 vectors; {bad:?}"));
    run.finish(13, "W_xi truncation", 10_000)
}
