use num_traits::{One, Zero};
use opindex::domination::{operator_norm, Bound};
use opindex::exact::{int, rat, Exponent, Rational};
use opindex::indices::{np_depth_probe, np_member, summing_chain, wc_member, ImpossibleReason, ProbeConfig};
use opindex::linalg;
use opindex::spaces::{FinVector, NormDescriptor, OperatorMatrix};
use proptest::prelude::*;

fn l1_matrix(rows: usize, cols: usize) -> impl Strategy<Value = OperatorMatrix> {
    prop::collection::vec(prop::collection::vec(-2i64..=2, cols), rows).prop_map(move |m| {
        let entries = m.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect();
        let lp = |n| NormDescriptor::lp(Exponent::one(), n).unwrap();
        OperatorMatrix::new(entries, lp(cols), lp(rows)).unwrap()
    })
}

fn exact_norm(a: &OperatorMatrix) -> Rational {
    match operator_norm(a).unwrap() {
        r if r.exact => match r.upper {
            Bound::Finite(k) => k,
            Bound::Infinite => unreachable!(),
        },
        r => panic!("inexact operator norm {r:?}"),
    }
}

fn pool_chains(pool: &[FinVector], len: usize) -> Vec<Vec<FinVector>> {
    fn go(pool: &[FinVector], len: usize, from: usize, cur: &mut Vec<FinVector>, out: &mut Vec<Vec<FinVector>>) {
        if cur.len() == len {
            out.push(cur.clone());
            return;
        }
        for i in from..pool.len() {
            cur.push(pool[i].clone());
            go(pool, len, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(pool, len, 0, &mut Vec::new(), &mut out);
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn membership_is_monotone_in_k(a in l1_matrix(3, 3), picks in prop::collection::vec(0usize..6, 1..3), k in 1i64..4, extra in 0i64..4) {
        let cfg = ProbeConfig::new(int(k), Exponent::one(), &a.domain).unwrap();
        let xs: Vec<FinVector> = picks.iter().map(|&i| cfg.pool[i].clone()).collect();
        if np_member(&a, &cfg, &xs).unwrap().holds() {
            let mut bigger = cfg.clone();
            bigger.k = int(k + extra);
            prop_assert!(np_member(&a, &bigger, &xs).unwrap().holds());
        }
    }

    #[test]
    fn no_chain_beyond_the_rank(a in l1_matrix(3, 3)) {
        let rank = linalg::rank(&a.entries);
        prop_assume!(rank < 3);
        let cfg = ProbeConfig::new(int(1000), Exponent::one(), &a.domain).unwrap();
        for chain in pool_chains(&cfg.pool, rank + 1) {
            prop_assert!(!np_member(&a, &cfg, &chain).unwrap().holds());
        }
        let report = np_depth_probe(&a, &cfg).unwrap();
        prop_assert!(report.witnessed_depth <= rank);
        if report.reason == Some(ImpossibleReason::RankBound) {
            prop_assert_eq!(report.impossible_beyond, Some(rank + 1));
        }
    }

    #[test]
    fn witnesses_survive_small_perturbations(a in l1_matrix(3, 3), noise in prop::collection::vec(prop::collection::vec(-3i64..=3, 3), 3), k in 2i64..5) {
        let cfg = ProbeConfig::new(int(k), Exponent::one(), &a.domain).unwrap();
        let report = np_depth_probe(&a, &cfg).unwrap();
        prop_assume!(report.witnessed_depth > 0);
        let e = OperatorMatrix::new(
            noise.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect(),
            a.domain.clone(),
            a.codomain.clone(),
        ).unwrap();
        let en = exact_norm(&e);
        // Scale the noise so that ‖A - B‖ < 1/2K.
        let target = rat(1, 2 * k) * rat(9, 10);
        let s = if en.is_zero() { Rational::zero() } else { target / en };
        let b = OperatorMatrix::new(
            a.entries.iter().zip(&e.entries).map(|(ra, re)| ra.iter().zip(re).map(|(x, y)| x + y * &s).collect()).collect(),
            a.domain.clone(),
            a.codomain.clone(),
        ).unwrap();
        prop_assert!(exact_norm(&a.sub(&b)) < rat(1, 2 * k));
        let mut doubled = cfg.clone();
        doubled.k = int(2 * k);
        prop_assert!(np_member(&b, &doubled, &report.witness).unwrap().holds());
    }

    #[test]
    fn composition_bound(a in l1_matrix(3, 3), b in l1_matrix(3, 3), c in l1_matrix(3, 3), k in 1i64..4) {
        let abc = a.compose(&b.compose(&c).unwrap()).unwrap();
        let cfg = ProbeConfig::new(int(k), Exponent::one(), &abc.domain).unwrap();
        let report = np_depth_probe(&abc, &cfg).unwrap();
        prop_assume!(report.witnessed_depth > 0);
        let (na, nc) = (exact_norm(&a), exact_norm(&c));
        // x_t = C w_t / ‖C‖ is a chain for B at constant K ‖A‖ ‖C‖.
        let xs: Vec<FinVector> = report.witness.iter().map(|w| c.apply(w).unwrap().scale(&nc.recip())).collect();
        let kb = (int(k) * na * nc).max(Rational::one());
        let mut cfg_b = ProbeConfig::new(kb, Exponent::one(), &b.domain).unwrap();
        cfg_b.pool = xs.clone();
        prop_assert!(np_member(&b, &cfg_b, &xs).unwrap().holds());
    }
}

#[test]
fn summing_chain_is_isometric_on_c0() {
    for n in 1..=8 {
        let id = OperatorMatrix::identity(NormDescriptor::lp(Exponent::Infinity, n).unwrap());
        assert!(wc_member(&id, &Rational::one(), &summing_chain(n)).unwrap().holds(), "n = {n}");
    }
}
