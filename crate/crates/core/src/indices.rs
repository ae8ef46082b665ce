//! Bounded-depth probes of index trees: non-preservation chains, strictly
//! singular chains, summing-basis (weak compactness) chains and spreading
//! model certificates along Schreier families.
//!
//! Probes report finite depth facts. The only ordinal they ever claim is
//! `1 + rank(A)`, when the rank bound closes the search.

use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};

use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::domination::{is_dominated, is_k_basic, p_abs_convex_block, Block, Decision, DominationError, KBasic};
use crate::exact::{fmt_rational, int, rat, Exponent, Rational};
use crate::families::{restrict, FamilyError, FamilyExpr, FinSet, DEFAULT_RESTRICT_N};
use crate::linalg;
use crate::ordinal::Ordinal;
use crate::spaces::{norm, FinVector, NormDescriptor, OperatorMatrix, SpaceError};

pub const DEFAULT_MAX_DEPTH: usize = 8;
pub const DEFAULT_SEARCH_BUDGET: u64 = 100_000;
const UNIT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IndexError {
    #[error(transparent)]
    Domination(#[from] DominationError),
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error("chain of length {len} exceeds the basis dimension {max}")]
    ChainTooLong { len: usize, max: usize },
    #[error("vector {0} does not have norm 1")]
    NotUnit(usize),
    #[error("vector {0} lies outside the unit ball")]
    NotInBall(usize),
    #[error("the target basis must be an lp descriptor")]
    BasisNotLp,
    #[error("constant must be at least 1, got {0}")]
    BadConstant(String),
    #[error("domination at constant {0} is undecided at the maximum precision")]
    Undecided(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ProbeConfig {
    #[serde(with = "crate::exact::serde_rational")]
    pub k: Rational,
    /// `lp(p, n)`: the unit vector basis of ℓ_p, truncated to `n` vectors.
    pub basis: NormDescriptor,
    pub max_depth: usize,
    pub search_budget: u64,
    pub pool: Vec<FinVector>,
    pub block_closure: bool,
}

impl ProbeConfig {
    /// Constant `k`, basis `lp(p, dim)` and the default pool of `domain`.
    pub fn new(k: Rational, p: Exponent, domain: &NormDescriptor) -> Result<Self, IndexError> {
        let dim = domain.dim();
        Ok(ProbeConfig {
            k,
            basis: NormDescriptor::lp(p, dim.max(DEFAULT_MAX_DEPTH))?,
            max_depth: DEFAULT_MAX_DEPTH,
            search_budget: DEFAULT_SEARCH_BUDGET,
            pool: default_pool(domain)?,
            block_closure: false,
        })
    }

    fn exponent(&self) -> Result<&Exponent, IndexError> {
        match &self.basis {
            NormDescriptor::Lp { p, .. } => Ok(p),
            _ => Err(IndexError::BasisNotLp),
        }
    }

    fn check(&self) -> Result<(), IndexError> {
        self.exponent()?;
        check_constant(&self.k)
    }
}

fn check_constant(k: &Rational) -> Result<(), IndexError> {
    if *k < Rational::one() {
        return Err(IndexError::BadConstant(fmt_rational(k)));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Condition {
    /// `(x_i) ≲_C (e_i)` fails.
    Upper,
    /// `(e_i) ≲_K (A x_i)` (or the summing/spreading analogue) fails.
    Lower,
    /// The chain is not `K`-basic.
    Basic { m: usize, n: usize },
    /// `(x_i) ≲_K (A x_i)` fails.
    Image,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "result", rename_all = "kebab-case")]
pub enum Verdict {
    Holds,
    Fails {
        condition: Condition,
        #[serde(with = "crate::exact::serde_rational_vec")]
        witness: Vec<Rational>,
    },
}

impl Verdict {
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::Holds)
    }
}

fn decided(d: Decision, k: &Rational, condition: Condition) -> Result<Option<Verdict>, IndexError> {
    match d {
        Decision::Holds => Ok(None),
        Decision::Fails { witness } => Ok(Some(Verdict::Fails { condition, witness })),
        Decision::Undecided => Err(IndexError::Undecided(fmt_rational(k))),
    }
}

fn basis_system(p: &Exponent, n: usize) -> Result<(NormDescriptor, Vec<FinVector>), IndexError> {
    let d = NormDescriptor::lp(p.clone(), n)?;
    Ok((d, (0..n).map(|i| FinVector::unit(n, i)).collect()))
}

fn images(a: &OperatorMatrix, xs: &[FinVector]) -> Result<Vec<FinVector>, IndexError> {
    Ok(xs.iter().map(|x| a.apply(x)).collect::<Result<_, _>>()?)
}

/// Membership of `xs` in the tree `T_{(e_i)}(A, X, Y, K)`:
/// `(x_i) ≲_1 (e_i)` and `(e_i) ≲_K (A x_i)`.
pub fn np_member(a: &OperatorMatrix, cfg: &ProbeConfig, xs: &[FinVector]) -> Result<Verdict, IndexError> {
    cfg.check()?;
    let max = cfg.basis.dim();
    if xs.len() > max {
        return Err(IndexError::ChainTooLong { len: xs.len(), max });
    }
    if xs.is_empty() {
        return Ok(Verdict::Holds);
    }
    let (lp, es) = basis_system(cfg.exponent()?, xs.len())?;
    let one = Rational::one();
    if let Some(v) = decided(is_dominated(xs, &a.domain, &es, &lp, &one)?, &one, Condition::Upper)? {
        return Ok(v);
    }
    let ax = images(a, xs)?;
    if let Some(v) = decided(is_dominated(&es, &lp, &ax, &a.codomain, &cfg.k)?, &cfg.k, Condition::Lower)? {
        return Ok(v);
    }
    Ok(Verdict::Holds)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ImpossibleReason {
    /// Images of a longer chain are linearly dependent.
    RankBound,
    /// No extension exists inside the candidate pool.
    ExhaustedPool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DepthReport {
    pub witnessed_depth: usize,
    pub witness: Vec<FinVector>,
    pub impossible_beyond: Option<usize>,
    pub reason: Option<ImpossibleReason>,
    /// `1 + rank(A)`, set only when the rank bound is attained.
    pub finite_index_claim: Option<usize>,
    pub budget_exhausted: bool,
    pub nodes_expanded: u64,
}

/// Standard basis vectors and pairwise differences, scaled into the unit ball.
pub fn default_pool(domain: &NormDescriptor) -> Result<Vec<FinVector>, IndexError> {
    let n = domain.dim();
    let mut raw: Vec<FinVector> = (0..n).map(|i| FinVector::unit(n, i)).collect();
    for i in 0..n {
        for j in i + 1..n {
            raw.push(FinVector::unit(n, i).add(&FinVector::unit(n, j).scale(&int(-1))));
        }
    }
    let mut out = Vec::with_capacity(raw.len());
    for v in raw {
        let r = norm(domain, &v)?;
        if !r.hi().is_zero() {
            out.push(v.scale(&r.hi().recip()));
        }
    }
    Ok(out)
}

/// One level of two-term `p`-absolutely convex blocks of the pool, kept
/// when they stay in the unit ball of `domain`.
pub fn block_closure(pool: &[FinVector], p: &Exponent, domain: &NormDescriptor) -> Result<Vec<FinVector>, IndexError> {
    let pairs: Vec<[Rational; 2]> = match p {
        Exponent::Infinity => vec![[int(1), int(1)], [int(1), int(-1)]],
        _ if p.is_one() => vec![[rat(1, 2), rat(1, 2)], [rat(1, 2), rat(-1, 2)]],
        _ if p.is_two() => vec![[rat(3, 5), rat(4, 5)], [rat(3, 5), rat(-4, 5)]],
        _ => Vec::new(),
    };
    let mut out = pool.to_vec();
    for i in 0..pool.len() {
        for j in i + 1..pool.len() {
            let sys = [pool[i].clone(), pool[j].clone()];
            for c in &pairs {
                let blk = p_abs_convex_block(&sys, p, &[Block { start: 0, coeffs: c.to_vec() }], UNIT_TOLERANCE)?;
                let y = blk.vectors.into_iter().next().expect("one block");
                if y.is_zero() || out.contains(&y) {
                    continue;
                }
                if *norm(domain, &y)?.hi() <= Rational::one() {
                    out.push(y);
                }
            }
        }
    }
    Ok(out)
}

fn check_ball(domain: &NormDescriptor, xs: &[FinVector]) -> Result<(), IndexError> {
    for (i, x) in xs.iter().enumerate() {
        if *norm(domain, x)?.lo() > Rational::one() {
            return Err(IndexError::NotInBall(i));
        }
    }
    Ok(())
}

struct Search<'a> {
    a: &'a OperatorMatrix,
    cfg: &'a ProbeConfig,
    pool: &'a [FinVector],
    limit: usize,
    budget: &'a AtomicU64,
    exhausted: &'a AtomicBool,
}

impl Search<'_> {
    /// Deepest member chain extending `chain` with increasing pool indices.
    fn dfs(&self, chain: &mut Vec<usize>, best: &mut Vec<usize>) -> Result<(), IndexError> {
        if chain.len() > best.len() {
            *best = chain.clone();
        }
        if chain.len() == self.limit {
            return Ok(());
        }
        let start = chain.last().map_or(0, |&l| l + 1);
        for next in start..self.pool.len() {
            if best.len() == self.limit {
                return Ok(());
            }
            if self.budget.fetch_add(1, Ordering::Relaxed) >= self.cfg.search_budget {
                self.exhausted.store(true, Ordering::Relaxed);
                return Ok(());
            }
            chain.push(next);
            let xs: Vec<FinVector> = chain.iter().map(|&i| self.pool[i].clone()).collect();
            if np_member(self.a, self.cfg, &xs)?.holds() {
                self.dfs(chain, best)?;
            }
            chain.pop();
        }
        Ok(())
    }
}

/// Searches pool chains for the tree `T_{(e_i)}(A, X, Y, K)` up to
/// `cfg.max_depth`, closing the search with the rank bound.
///
/// The ℓ_p basis is symmetric, so membership does not depend on the order
/// of a chain and only increasing pool index sequences are explored.
pub fn np_depth_probe(a: &OperatorMatrix, cfg: &ProbeConfig) -> Result<DepthReport, IndexError> {
    cfg.check()?;
    let mut pool = cfg.pool.clone();
    if cfg.block_closure {
        pool = block_closure(&pool, cfg.exponent()?, &a.domain)?;
    }
    check_ball(&a.domain, &pool)?;
    let rank = linalg::rank(&a.entries);
    let limit = cfg.max_depth.min(rank).min(cfg.basis.dim());
    let budget = AtomicU64::new(0);
    let exhausted = AtomicBool::new(false);
    let search = Search { a, cfg, pool: &pool, limit, budget: &budget, exhausted: &exhausted };
    let per_root: Vec<Result<Vec<usize>, IndexError>> = (0..pool.len())
        .into_par_iter()
        .map(|root| {
            let mut best = Vec::new();
            if limit == 0 {
                return Ok(best);
            }
            let chain = vec![root];
            if budget.fetch_add(1, Ordering::Relaxed) >= cfg.search_budget {
                exhausted.store(true, Ordering::Relaxed);
                return Ok(best);
            }
            let xs = [pool[root].clone()];
            if np_member(a, cfg, &xs)?.holds() {
                search.dfs(&mut chain.clone(), &mut best)?;
            }
            Ok(best)
        })
        .collect();
    let mut best: Vec<usize> = Vec::new();
    for r in per_root {
        let c = r?;
        if c.len() > best.len() {
            best = c;
        }
    }
    let depth = best.len();
    let budget_exhausted = exhausted.load(Ordering::Relaxed);
    let (impossible_beyond, reason, claim) = if depth == rank {
        (Some(rank + 1), Some(ImpossibleReason::RankBound), Some(1 + rank))
    } else if depth < limit && !budget_exhausted {
        (Some(depth + 1), Some(ImpossibleReason::ExhaustedPool), None)
    } else {
        (Some(rank + 1), Some(ImpossibleReason::RankBound), None)
    };
    Ok(DepthReport {
        witnessed_depth: depth,
        witness: best.iter().map(|&i| pool[i].clone()).collect(),
        impossible_beyond,
        reason,
        finite_index_claim: claim,
        budget_exhausted,
        nodes_expanded: budget.load(Ordering::Relaxed),
    })
}

/// Membership in `SS(A, X, Y, K)`: a `K`-basic chain of unit vectors with
/// `(x_i) ≲_K (A x_i)`.
pub fn ss_member(a: &OperatorMatrix, k: &Rational, xs: &[FinVector]) -> Result<Verdict, IndexError> {
    check_constant(k)?;
    for (i, x) in xs.iter().enumerate() {
        let r = norm(&a.domain, x)?;
        let one = Rational::one();
        let off = (r.lo() - &one).abs().max((r.hi() - &one).abs());
        if crate::exact::to_f64(&off) > UNIT_TOLERANCE {
            return Err(IndexError::NotUnit(i));
        }
    }
    if xs.is_empty() {
        return Ok(Verdict::Holds);
    }
    match is_k_basic(xs, &a.domain, k)? {
        KBasic::Basic => {}
        KBasic::Violation { a: w, m, n } => return Ok(Verdict::Fails { condition: Condition::Basic { m, n }, witness: w }),
    }
    let ax = images(a, xs)?;
    if let Some(v) = decided(is_dominated(xs, &a.domain, &ax, &a.codomain, k)?, k, Condition::Image)? {
        return Ok(v);
    }
    Ok(Verdict::Holds)
}

/// `x_i = e_i + … + e_n`: in ℓ_∞^n these reproduce the summing norm,
/// `‖Σ a_i x_i‖_∞ = max_m |Σ_{i≤m} a_i|`.
pub fn summing_chain(n: usize) -> Vec<FinVector> {
    (0..n).map(|i| FinVector::new((0..n).map(|j| if j >= i { Rational::one() } else { Rational::zero() }).collect())).collect()
}

/// `(s_i) ≲_K (A x_i)` with `(s_i)` the summing basis, for `‖x_i‖ ≤ 1`.
pub fn wc_member(a: &OperatorMatrix, k: &Rational, xs: &[FinVector]) -> Result<Verdict, IndexError> {
    check_constant(k)?;
    check_ball(&a.domain, xs)?;
    if xs.is_empty() {
        return Ok(Verdict::Holds);
    }
    let n = xs.len();
    let summing = NormDescriptor::summing(n)?;
    let ss: Vec<FinVector> = (0..n).map(|i| FinVector::unit(n, i)).collect();
    let ax = images(a, xs)?;
    if let Some(v) = decided(is_dominated(&ss, &summing, &ax, &a.codomain, k)?, k, Condition::Lower)? {
        return Ok(v);
    }
    Ok(Verdict::Holds)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "result", rename_all = "kebab-case")]
pub enum Certificate {
    Pass { sets_checked: usize },
    Fail { set: FinSet, verdict: Verdict },
}

impl Certificate {
    pub fn passed(&self) -> bool {
        matches!(self, Certificate::Pass { .. })
    }
}

fn schreier_sets(xi: &Ordinal, n: usize) -> Result<Vec<FinSet>, IndexError> {
    if n > DEFAULT_RESTRICT_N as usize {
        return Err(FamilyError::GroundSetTooLarge { n: n as u32, limit: DEFAULT_RESTRICT_N }.into());
    }
    let fam = restrict(&FamilyExpr::schreier(xi.clone()), n as u32)?;
    Ok(fam.sets().into_iter().filter(|e| !e.is_empty()).collect())
}

fn pick(xs: &[FinVector], e: &FinSet) -> Vec<FinVector> {
    e.elems().iter().map(|&i| xs[i as usize - 1].clone()).collect()
}

/// Checks `(e_i)_{i∈E} ≲_a (x_i)_{i∈E}` and `(x_i)_{i∈E} ≲_b (e_i)_{i∈E}`
/// for every `E ∈ S_ξ ∩ P({1..n})`, in order of the largest element.
pub fn spreading_model_certificate(
    xs: &[FinVector],
    space: &NormDescriptor,
    p: &Exponent,
    xi: &Ordinal,
    a: &Rational,
    b: &Rational,
) -> Result<Certificate, IndexError> {
    let sets = schreier_sets(xi, xs.len())?;
    for e in &sets {
        let sub = pick(xs, e);
        let (lp, es) = basis_system(p, sub.len())?;
        if let Some(v) = decided(is_dominated(&es, &lp, &sub, space, a)?, a, Condition::Lower)? {
            return Ok(Certificate::Fail { set: e.clone(), verdict: v });
        }
        if let Some(v) = decided(is_dominated(&sub, space, &es, &lp, b)?, b, Condition::Upper)? {
            return Ok(Certificate::Fail { set: e.clone(), verdict: v });
        }
    }
    Ok(Certificate::Pass { sets_checked: sets.len() })
}

/// Every `E ∈ S_ξ ∩ P({1..n})` yields a member chain `(x_i)_{i∈E}` of
/// `T_{(e_i)}(A, X, Y, K)`.
pub fn schreier_indexed_member(
    a: &OperatorMatrix,
    cfg: &ProbeConfig,
    xi: &Ordinal,
    xs: &[FinVector],
) -> Result<Certificate, IndexError> {
    let sets = schreier_sets(xi, xs.len())?;
    for e in &sets {
        let v = np_member(a, cfg, &pick(xs, e))?;
        if !v.holds() {
            return Ok(Certificate::Fail { set: e.clone(), verdict: v });
        }
    }
    Ok(Certificate::Pass { sets_checked: sets.len() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;

    fn d(s: &str) -> NormDescriptor {
        s.parse().unwrap()
    }

    fn basis(n: usize) -> Vec<FinVector> {
        (0..n).map(|i| FinVector::unit(n, i)).collect()
    }

    fn cfg(k: i64, domain: &NormDescriptor) -> ProbeConfig {
        ProbeConfig::new(int(k), Exponent::one(), domain).unwrap()
    }

    #[test]
    fn np_member_examples() {
        let l1 = d("lp(1,3)");
        let id = OperatorMatrix::identity(l1.clone());
        assert!(np_member(&id, &cfg(1, &l1), &basis(3)).unwrap().holds());
        let zero = OperatorMatrix::zero(l1.clone(), l1.clone());
        assert!(matches!(
            np_member(&zero, &cfg(7, &l1), &basis(3)[..1]).unwrap(),
            Verdict::Fails { condition: Condition::Lower, .. }
        ));
        let l2 = d("lp(2,2)");
        let v = np_member(&OperatorMatrix::identity(l2.clone()), &cfg(1, &l2), &basis(2)).unwrap();
        assert!(matches!(v, Verdict::Fails { condition: Condition::Lower, .. }));
        let mut c = cfg(1, &l1);
        c.k = int(2);
        assert!(np_member(&OperatorMatrix::identity(l2.clone()), &c, &basis(2)).unwrap().holds());
    }

    #[test]
    fn depth_probe_examples() {
        let l1 = d("lp(1,3)");
        let rank1 = OperatorMatrix::new(
            vec![vec![int(1), int(2), int(0)], vec![int(2), int(4), int(0)], vec![int(0), int(0), int(0)]],
            l1.clone(),
            l1.clone(),
        )
        .unwrap();
        let rep = np_depth_probe(&rank1, &cfg(1, &l1)).unwrap();
        assert_eq!(rep.witnessed_depth, 1);
        assert_eq!(rep.impossible_beyond, Some(2));
        assert_eq!(rep.reason, Some(ImpossibleReason::RankBound));
        assert_eq!(rep.finite_index_claim, Some(2));

        let zero = OperatorMatrix::zero(l1.clone(), l1.clone());
        let rep = np_depth_probe(&zero, &cfg(1, &l1)).unwrap();
        assert_eq!((rep.witnessed_depth, rep.finite_index_claim), (0, Some(1)));

        let l14 = d("lp(1,4)");
        let mut c = cfg(1, &l14);
        c.pool = basis(4);
        let rep = np_depth_probe(&OperatorMatrix::identity(l14), &c).unwrap();
        assert_eq!(rep.witnessed_depth, 4);
        assert_eq!(rep.finite_index_claim, Some(5));
    }

    #[test]
    fn pool_exhaustion_is_pool_relative() {
        let l1 = d("lp(1,2)");
        // Shrinks every vector: no chain meets the lower estimate at K = 1.
        let half = OperatorMatrix::diagonal(l1.clone(), &[rat(1, 2), rat(1, 2)]).unwrap();
        let rep = np_depth_probe(&half, &cfg(1, &l1)).unwrap();
        assert_eq!(rep.witnessed_depth, 0);
        assert_eq!(rep.reason, Some(ImpossibleReason::ExhaustedPool));
        assert_eq!(rep.finite_index_claim, None);
        let rep = np_depth_probe(&half, &cfg(2, &l1)).unwrap();
        assert_eq!(rep.finite_index_claim, Some(3));
    }

    #[test]
    fn ss_member_examples() {
        let l2 = d("lp(2,3)");
        assert!(ss_member(&OperatorMatrix::identity(l2.clone()), &int(1), &basis(3)).unwrap().holds());
        let rep = vec![FinVector::unit(3, 0), FinVector::unit(3, 0)];
        assert!(matches!(
            ss_member(&OperatorMatrix::identity(l2.clone()), &int(50), &rep).unwrap(),
            Verdict::Fails { condition: Condition::Basic { m: 1, n: 2 }, .. }
        ));
        let l22 = d("lp(2,2)");
        let diag = OperatorMatrix::diagonal(l22, &[int(1), rat(1, 2)]).unwrap();
        assert!(!ss_member(&diag, &int(1), &basis(2)).unwrap().holds());
        assert!(ss_member(&diag, &int(2), &basis(2)).unwrap().holds());
        assert_eq!(
            ss_member(&diag, &int(2), &[FinVector::from_ints(&[2, 0])]),
            Err(IndexError::NotUnit(0))
        );
    }

    #[test]
    fn wc_member_examples() {
        for n in 1..=5 {
            let linf = NormDescriptor::lp(Exponent::Infinity, n).unwrap();
            assert!(wc_member(&OperatorMatrix::identity(linf), &int(1), &summing_chain(n)).unwrap().holds(), "n={n}");
        }
        for n in 2..=4 {
            let l2 = NormDescriptor::lp(Exponent::two(), n).unwrap();
            assert!(!wc_member(&OperatorMatrix::identity(l2), &int(1), &basis(n)).unwrap().holds());
        }
        let l1 = d("lp(1,2)");
        assert!(!wc_member(&OperatorMatrix::zero(l1.clone(), l1), &int(1), &basis(2)).unwrap().holds());
    }

    #[test]
    fn spreading_examples() {
        let one = Rational::one();
        let sch = d("schreier(1,8)");
        let c = spreading_model_certificate(&basis(8), &sch, &Exponent::one(), &Ordinal::one(), &one, &one).unwrap();
        assert!(c.passed());
        let linf = d("lp(inf,8)");
        let c = spreading_model_certificate(&basis(8), &linf, &Exponent::one(), &Ordinal::one(), &one, &one).unwrap();
        match c {
            Certificate::Fail { set, verdict: Verdict::Fails { witness, .. } } => {
                assert_eq!(set.elems(), &[2, 3]);
                assert_eq!(witness, vec![int(1), int(1)]);
            }
            other => panic!("{other:?}"),
        }
        let single = [FinVector::from_ints(&[1])];
        let c = spreading_model_certificate(&single, &d("lp(2,1)"), &Exponent::two(), &"w".parse().unwrap(), &one, &one);
        assert!(c.unwrap().passed());
    }

    #[test]
    fn schreier_indexed_examples() {
        let sch = d("schreier(1,6)");
        let c = cfg(1, &sch);
        let id = OperatorMatrix::identity(sch);
        assert!(schreier_indexed_member(&id, &c, &Ordinal::one(), &basis(6)).unwrap().passed());
        let l2 = d("lp(2,6)");
        let id2 = OperatorMatrix::identity(l2.clone());
        match schreier_indexed_member(&id2, &cfg(1, &l2), &Ordinal::one(), &basis(6)).unwrap() {
            Certificate::Fail { set, .. } => assert_eq!(set.elems(), &[2, 3]),
            other => panic!("{other:?}"),
        }
        let half = OperatorMatrix::diagonal(l2.clone(), &vec![rat(1, 2); 6]).unwrap();
        assert!(schreier_indexed_member(&half, &cfg(2, &l2), &Ordinal::zero(), &basis(6)).unwrap().passed());
    }

    #[test]
    fn block_closure_stays_in_ball() {
        let l1 = d("lp(1,2)");
        let pool = block_closure(&basis(2), &Exponent::one(), &l1).unwrap();
        assert_eq!(pool.len(), 4);
        let linf = d("lp(inf,2)");
        let pool = block_closure(&basis(2), &Exponent::Infinity, &linf).unwrap();
        assert!(pool.contains(&FinVector::from_ints(&[1, 1])));
    }
}
