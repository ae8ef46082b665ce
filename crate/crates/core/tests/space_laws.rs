use num_traits::{Signed, Zero};
use opindex::exact::{int, rat, Rational, Real};
use opindex::families::{restrict, FamilyExpr};
use opindex::ordinal::Ordinal;
use opindex::spaces::{norm, FinVector, NormDescriptor};
use proptest::prelude::*;

fn d(s: &str) -> NormDescriptor {
    s.parse().unwrap()
}

fn entry() -> impl Strategy<Value = Rational> {
    (-6i64..=6, 1i64..=4).prop_map(|(n, q)| rat(n, q))
}

fn vector(n: usize) -> impl Strategy<Value = FinVector> {
    prop::collection::vec(entry(), n).prop_map(FinVector::new)
}

/// Random downward-closed trees of sequences, as coordinate sets for `z(p,q,..)`.
fn tree_nodes(max: usize) -> impl Strategy<Value = Vec<Vec<u32>>> {
    prop::collection::vec((any::<prop::sample::Index>(), 0u32..3), 0..max).prop_map(|steps| {
        let mut nodes: Vec<Vec<u32>> = vec![Vec::new()];
        for (parent, label) in steps {
            let mut s = nodes[parent.index(nodes.len())].clone();
            s.push(label);
            if !nodes.contains(&s) {
                nodes.push(s);
            }
        }
        nodes.sort();
        nodes
    })
}

fn nrm(desc: &NormDescriptor, x: &FinVector) -> Real {
    norm(desc, x).unwrap()
}

fn exact(desc: &NormDescriptor, x: &FinVector) -> Rational {
    nrm(desc, x).as_exact().cloned().expect("exact norm")
}

/// Does the interval contain the square root of `sq`?
fn brackets_root(r: &Real, sq: &Rational) -> bool {
    r.lo() * r.lo() <= *sq && *sq <= r.hi() * r.hi()
}

fn abs_sum(x: &FinVector, e: &[u32]) -> Rational {
    e.iter().fold(Rational::zero(), |acc, &i| acc + x.0[i as usize - 1].abs())
}

fn schreier_members(xi: u64, n: usize) -> Vec<Vec<u32>> {
    let fam = restrict(&FamilyExpr::schreier(Ordinal::from(xi)), n as u32).unwrap();
    fam.sets().iter().map(|s| s.elems().to_vec()).filter(|e| !e.is_empty()).collect()
}

fn schreier_oracle(xi: u64, x: &FinVector) -> Rational {
    schreier_members(xi, x.len()).iter().map(|e| abs_sum(x, e)).max().unwrap_or_else(Rational::zero)
}

/// Best `Σ_j (Σ_{i∈E_j} |x_i|)²` over successive members `E_1 < E_2 < …`.
fn xxi2_oracle_sq(xi: u64, x: &FinVector) -> Rational {
    let members = schreier_members(xi, x.len());
    fn go(members: &[Vec<u32>], x: &FinVector, floor: u32) -> Rational {
        let mut best = Rational::zero();
        for e in members.iter().filter(|e| e[0] > floor) {
            let s = abs_sum(x, e);
            let v = &s * &s + go(members, x, *e.last().unwrap());
            best = best.max(v);
        }
        best
    }
    go(&members, x, 0)
}

/// Segments: `v` and a descendant `u`, all nodes in between.
fn segments(nodes: &[Vec<u32>]) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for t in nodes {
        for k in 0..=t.len() {
            let seg: Vec<usize> = (k..=t.len()).map(|j| nodes.iter().position(|s| s[..] == t[..j]).unwrap()).collect();
            out.push(seg);
        }
    }
    out
}

/// Best `Σ_j (Σ_{s∈I_j} |x_s|)^q` over families of disjoint segments, `p = 1`, integer `q`.
fn z1q_oracle(q: u32, nodes: &[Vec<u32>], x: &FinVector) -> Rational {
    let segs = segments(nodes);
    fn go(segs: &[Vec<usize>], used: &mut Vec<bool>, from: usize, x: &FinVector, q: u32) -> Rational {
        let mut best = Rational::zero();
        for (k, seg) in segs.iter().enumerate().skip(from) {
            if seg.iter().any(|&i| used[i]) {
                continue;
            }
            let m = seg.iter().fold(Rational::zero(), |acc, &i| acc + x.0[i].abs());
            for &i in seg {
                used[i] = true;
            }
            let v = num_traits::pow(m, q as usize) + go(segs, used, k + 1, x, q);
            for &i in seg {
                used[i] = false;
            }
            best = best.max(v);
        }
        best
    }
    go(&segs, &mut vec![false; nodes.len()], 0, x, q)
}

fn z_desc(q: i64, nodes: &[Vec<u32>]) -> NormDescriptor {
    NormDescriptor::zpq(int(1), int(q), nodes.to_vec()).unwrap()
}

const DESCRIPTORS: [&str; 12] = [
    "lp(1,5)",
    "lp(2,5)",
    "lp(inf,5)",
    "lp(3,5)",
    "schreier(0,5)",
    "schreier(1,5)",
    "schreier(2,5)",
    "xxi2(1,5)",
    "conv(schreier(1,5),2)",
    "dsum(lp(1,2); lp(2,2), schreier(1,3))",
    "dsum(lp(inf,3); lp(1,1), lp(2,2), xxi2(1,2))",
    "summing(5)",
];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn homogeneous(i in 0..DESCRIPTORS.len(), x in vector(5), c in entry()) {
        let desc = d(DESCRIPTORS[i]);
        let a = nrm(&desc, &x);
        let b = nrm(&desc, &x.scale(&c));
        let c = c.abs();
        prop_assert!(b.lo() <= &(&c * a.hi()) && &(&c * a.lo()) <= b.hi());
    }

    #[test]
    fn triangle_inequality(i in 0..DESCRIPTORS.len(), x in vector(5), y in vector(5)) {
        let desc = d(DESCRIPTORS[i]);
        let s = nrm(&desc, &x.add(&y));
        prop_assert!(*s.lo() <= nrm(&desc, &x).hi() + nrm(&desc, &y).hi());
    }

    #[test]
    fn lattice_norms_are_unconditional(i in 0..DESCRIPTORS.len(), x in vector(5), signs in prop::collection::vec(any::<bool>(), 5)) {
        let desc = d(DESCRIPTORS[i]);
        prop_assume!(desc.is_lattice());
        let flipped = FinVector::new(x.0.iter().zip(&signs).map(|(v, &s)| if s { -v.clone() } else { v.clone() }).collect());
        prop_assert_eq!(nrm(&desc, &x), nrm(&desc, &flipped));
    }

    #[test]
    fn descriptors_round_trip(i in 0..DESCRIPTORS.len()) {
        let desc = d(DESCRIPTORS[i]);
        prop_assert_eq!(desc.to_string().parse::<NormDescriptor>().unwrap(), desc);
    }

    #[test]
    fn schreier_norm_matches_enumeration(xi in 0u64..3, x in vector(7)) {
        let desc = NormDescriptor::schreier(Ordinal::from(xi), 7).unwrap();
        prop_assert_eq!(exact(&desc, &x), schreier_oracle(xi, &x));
    }

    #[test]
    fn xxi2_norm_matches_enumeration(xi in 0u64..3, x in vector(7)) {
        let desc = NormDescriptor::xxi2(Ordinal::from(xi), 7).unwrap();
        prop_assert!(brackets_root(&nrm(&desc, &x), &xxi2_oracle_sq(xi, &x)));
    }

    #[test]
    fn zpq_norm_matches_segment_enumeration(nodes in tree_nodes(7), seed in vector(8)) {
        let x = FinVector::new(seed.0[..nodes.len()].to_vec());
        let z12 = z_desc(2, &nodes);
        prop_assert!(brackets_root(&nrm(&z12, &x), &z1q_oracle(2, &nodes, &x)));
        let z11 = z_desc(1, &nodes);
        prop_assert_eq!(exact(&z11, &x), z1q_oracle(1, &nodes, &x));
    }

    #[test]
    fn sandwiched_between_sup_and_l1(xi in 0u64..3, x in vector(6), nodes in tree_nodes(6), q in 1i64..4) {
        let sup = exact(&d("lp(inf,6)"), &x);
        let l1 = exact(&d("lp(1,6)"), &x);
        let s = nrm(&NormDescriptor::schreier(Ordinal::from(xi), 6).unwrap(), &x);
        let t = nrm(&NormDescriptor::xxi2(Ordinal::from(xi), 6).unwrap(), &x);
        for r in [&s, &t] {
            prop_assert!(r.hi() >= &sup && r.lo() <= &l1);
        }
        prop_assert!(t.hi() >= s.lo());
        let y = FinVector::new(x.0.iter().cycle().take(nodes.len()).cloned().collect());
        let z = nrm(&NormDescriptor::zpq(int(1), int(q), nodes.clone()).unwrap(), &y);
        let ysup = y.0.iter().map(|v| v.abs()).max().unwrap();
        let yl1 = y.0.iter().fold(Rational::zero(), |acc, v| acc + v.abs());
        prop_assert!(z.hi() >= &ysup && z.lo() <= &yl1);
    }

    #[test]
    fn zpq_on_a_branch_is_l1(len in 1usize..7, q in 1i64..4, seed in vector(7)) {
        let nodes: Vec<Vec<u32>> = (0..len).map(|k| vec![0; k]).collect();
        let x = FinVector::new(seed.0[..len].to_vec());
        let l1 = x.0.iter().fold(Rational::zero(), |acc, v| acc + v.abs());
        let z = nrm(&NormDescriptor::zpq(int(1), int(q), nodes).unwrap(), &x);
        prop_assert!(z.contains(&l1));
    }

    #[test]
    fn convexified_l1_is_l2(x in vector(5)) {
        let sq = x.0.iter().fold(Rational::zero(), |acc, v| acc + v * v);
        prop_assert!(brackets_root(&nrm(&d("conv(lp(1,5),2)"), &x), &sq));
        prop_assert!(brackets_root(&nrm(&d("lp(2,5)"), &x), &sq));
    }

    #[test]
    fn convexification_formula(x in vector(5)) {
        // conv(X, 2)(x) = ‖(x_i²)‖_X^{1/2}
        let squares = FinVector::new(x.0.iter().map(|v| v * v).collect());
        let inner = exact(&d("schreier(1,5)"), &squares);
        prop_assert!(brackets_root(&nrm(&d("conv(schreier(1,5),2)"), &x), &inner));
    }

    #[test]
    fn single_summand_direct_sum_is_the_inner_norm(i in 0..DESCRIPTORS.len(), x in vector(5), outer in 0usize..3) {
        let inner = d(DESCRIPTORS[i]);
        prop_assume!(!matches!(inner, NormDescriptor::Summing { .. }));
        let outer = d(["lp(1,1)", "lp(2,1)", "lp(inf,1)"][outer]);
        let sum = NormDescriptor::direct_sum(outer, vec![inner.clone()]).unwrap();
        let a = nrm(&inner, &x);
        let b = nrm(&sum, &x);
        prop_assert!(a.lo() <= b.hi() && b.lo() <= a.hi());
    }
}
