use num_traits::{One, Signed, Zero};
use opindex::domination::{domination_constant, p_abs_convex_block, Block, Bound, DominationReport, Method};
use opindex::exact::{int, rat, Exponent, Rational};
use opindex::spaces::{norm, FinVector, NormDescriptor};
use proptest::prelude::*;

fn d(s: &str) -> NormDescriptor {
    s.parse().unwrap()
}

const POLYHEDRAL: [&str; 4] = ["lp(1,{})", "lp(inf,{})", "schreier(1,{})", "summing({})"];

fn poly(i: usize, dim: usize) -> NormDescriptor {
    d(&POLYHEDRAL[i].replace("{}", &dim.to_string()))
}

fn system(n: usize, dim: usize) -> impl Strategy<Value = Vec<FinVector>> {
    prop::collection::vec(prop::collection::vec(-3i64..=3, dim), n)
        .prop_map(|rows| rows.iter().map(|r| FinVector::from_ints(r)).collect())
}

fn basis(n: usize) -> Vec<FinVector> {
    (0..n).map(|i| FinVector::unit(n, i)).collect()
}

fn exact_value(r: &DominationReport) -> Bound {
    assert!(r.exact, "{r:?}");
    r.upper.clone()
}

fn combination(vs: &[FinVector], a: &[Rational]) -> FinVector {
    FinVector::combination(vs, a, vs[0].len())
}

fn exact_norm(desc: &NormDescriptor, v: &FinVector) -> Rational {
    norm(desc, v).unwrap().as_exact().cloned().unwrap()
}

/// Maximum of the ratio over `{-1, -1+h, …, 1}^n`, with `h = 1/steps`.
fn grid_max(xs: &[FinVector], x: &NormDescriptor, ys: &[FinVector], y: &NormDescriptor, steps: i64) -> Rational {
    let n = xs.len();
    let mut best = Rational::zero();
    let mut idx = vec![-steps; n];
    loop {
        let a: Vec<Rational> = idx.iter().map(|&k| rat(k, steps)).collect();
        let den = exact_norm(y, &combination(ys, &a));
        if !den.is_zero() {
            best = best.max(exact_norm(x, &combination(xs, &a)) / den);
        }
        let mut i = 0;
        loop {
            if i == n {
                return best;
            }
            idx[i] += 1;
            if idx[i] <= steps {
                break;
            }
            idx[i] = -steps;
            i += 1;
        }
    }
}

/// `Σ_i ‖v_i‖`: a Lipschitz constant of `a ↦ ‖Σ a_i v_i‖` for the sup norm on `a`.
fn lipschitz(vs: &[FinVector], desc: &NormDescriptor) -> Rational {
    vs.iter().fold(Rational::zero(), |acc, v| acc + exact_norm(desc, v))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn scaling(xi in 0..4usize, yi in 0..4usize, xs in system(3, 3), ys in system(3, 3), c in (-4i64..=4, 1i64..=3)) {
        let (x, y) = (poly(xi, 3), poly(yi, 3));
        let c = rat(c.0, c.1);
        let k = exact_value(&domination_constant(&xs, &x, &ys, &y).unwrap());
        let scaled: Vec<FinVector> = xs.iter().map(|v| v.scale(&c)).collect();
        let kc = exact_value(&domination_constant(&scaled, &x, &ys, &y).unwrap());
        match (k, kc) {
            (Bound::Finite(k), Bound::Finite(kc)) => prop_assert_eq!(kc, k * c.abs()),
            (Bound::Infinite, Bound::Infinite) => prop_assert!(!c.is_zero()),
            (Bound::Infinite, Bound::Finite(kc)) => prop_assert!(c.is_zero() && kc.is_zero()),
            (k, kc) => prop_assert!(false, "{k} vs {kc}"),
        }
    }

    #[test]
    fn transitivity(xi in 0..4usize, yi in 0..4usize, zi in 0..4usize, xs in system(3, 3), ys in system(3, 3), zs in system(3, 3)) {
        let (x, y, z) = (poly(xi, 3), poly(yi, 3), poly(zi, 3));
        let kxy = exact_value(&domination_constant(&xs, &x, &ys, &y).unwrap());
        let kyz = exact_value(&domination_constant(&ys, &y, &zs, &z).unwrap());
        let kxz = exact_value(&domination_constant(&xs, &x, &zs, &z).unwrap());
        if let (Bound::Finite(a), Bound::Finite(b)) = (kxy, kyz) {
            prop_assert!(kxz <= Bound::Finite(a * b));
        }
    }

    #[test]
    fn euclidean_transitivity(xs in system(2, 2), ys in system(2, 2), zs in system(2, 2)) {
        let l2 = d("lp(2,2)");
        let l1 = d("lp(1,2)");
        let rxy = domination_constant(&xs, &l2, &ys, &l1).unwrap();
        let ryz = domination_constant(&ys, &l1, &zs, &l2).unwrap();
        let rxz = domination_constant(&xs, &l2, &zs, &l2).unwrap();
        if let (Bound::Finite(a), Bound::Finite(b)) = (&rxy.upper, &ryz.upper) {
            prop_assert!(rxz.lower <= Bound::Finite(a * b));
        }
    }

    #[test]
    fn vertex_witness_attains_the_constant(xi in 0..4usize, yi in 0..4usize, xs in system(3, 4), ys in system(3, 4)) {
        let (x, y) = (poly(xi, 4), poly(yi, 4));
        let r = domination_constant(&xs, &x, &ys, &y).unwrap();
        let num = exact_norm(&x, &combination(&xs, &r.witness));
        let den = exact_norm(&y, &combination(&ys, &r.witness));
        match exact_value(&r) {
            Bound::Infinite => prop_assert!(den.is_zero() && !num.is_zero()),
            Bound::Finite(k) if r.method == Method::Vertex => prop_assert_eq!(num / den, k),
            Bound::Finite(_) => {}
        }
    }

    #[test]
    fn p_absolutely_convex_blocks_stay_dominated(
        xi in 0..4usize,
        raw in system(5, 4),
        p_inf in any::<bool>(),
        cuts in prop::collection::vec(1usize..3, 1..4),
        weights in prop::collection::vec(1i64..5, 5),
        signs in prop::collection::vec(any::<bool>(), 5),
    ) {
        let x = poly(xi, 4);
        let p = if p_inf { Exponent::Infinity } else { Exponent::one() };
        let lp = NormDescriptor::lp(p.clone(), 5).unwrap();
        let k = exact_value(&domination_constant(&raw, &x, &basis(5), &lp).unwrap());
        let Bound::Finite(k) = k else { unreachable!("the basis is independent") };
        prop_assume!(!k.is_zero());
        let xs: Vec<FinVector> = raw.iter().map(|v| v.scale(&k.recip())).collect();
        prop_assert_eq!(exact_value(&domination_constant(&xs, &x, &basis(5), &lp).unwrap()), Bound::Finite(int(1)));

        let mut blocks = Vec::new();
        let mut start = 0;
        for len in cuts {
            if start + len > 5 {
                break;
            }
            let w: Vec<Rational> = (start..start + len)
                .map(|i| {
                    let s = if signs[i] { -Rational::one() } else { Rational::one() };
                    s * int(weights[i])
                })
                .collect();
            let scale = if p_inf {
                w.iter().map(|v| v.abs()).max().unwrap()
            } else {
                w.iter().fold(Rational::zero(), |acc, v| acc + v.abs())
            };
            blocks.push(Block { start, coeffs: w.iter().map(|v| v / &scale).collect() });
            start += len;
        }
        let out = p_abs_convex_block(&xs, &p, &blocks, 1e-9).unwrap();
        prop_assert!(out.exactly_normalized);
        let m = out.vectors.len();
        let lpm = NormDescriptor::lp(p, m).unwrap();
        let kb = exact_value(&domination_constant(&out.vectors, &x, &basis(m), &lpm).unwrap());
        prop_assert!(kb <= Bound::Finite(int(1)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn vertex_enumeration_matches_grid(xi in 0..4usize, yi in 0..4usize, n in 1usize..4, xs in system(3, 3), ys in system(3, 3)) {
        let (x, y) = (poly(xi, 3), poly(yi, 3));
        let (xs, ys) = (&xs[..n], &ys[..n]);
        let r = domination_constant(xs, &x, ys, &y).unwrap();
        let Bound::Finite(k) = exact_value(&r) else {
            return Ok(());
        };
        let steps = 8;
        let g = grid_max(xs, &x, ys, &y, steps);
        prop_assert!(g <= k);
        // Rounding the witness (scaled to sup norm 1) to the grid moves
        // each side by at most half a step times its Lipschitz constant.
        let sup = r.witness.iter().map(|v| v.abs()).max().unwrap();
        let w: Vec<Rational> = r.witness.iter().map(|v| v / &sup).collect();
        let num = exact_norm(&x, &combination(xs, &w));
        let den = exact_norm(&y, &combination(ys, &w));
        let half = rat(1, 2 * steps);
        let floor = (num - lipschitz(xs, &x) * &half).max(Rational::zero()) / (den + lipschitz(ys, &y) * &half);
        prop_assert!(g >= floor, "grid {g} below {floor}, constant {k}");
    }
}
