//! Domination constants between finite vector systems: the least `K` with
//! `‖Σ a_i x_i‖_X ≤ K ‖Σ a_i y_i‖_Y` for every coefficient vector `a`.

use std::cmp::Ordering;
use std::fmt;

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::exact::{approx_f64, fmt_rational, int, to_f64, Exponent, Rational, Real, DEFAULT_PRECISION_BITS};
use crate::linalg::{self, Matrix};
use crate::polytope::{self, PolytopeError, DEFAULT_VERTEX_CAP};
use crate::spaces::{
    minorant_generators, norm_f64, norm_with_bits, polyhedral_generators, FinVector, Generator, NormDescriptor,
    OperatorMatrix, SpaceError,
};

const SIGN_PATTERN_CAP: usize = 1 << 18;
const ORTHANT_SEED_MAX_DIM: usize = 6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DominationError {
    #[error("systems have different lengths ({0} and {1})")]
    LengthMismatch(usize, usize),
    #[error("empty system")]
    Empty,
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error("blocks overlap or are not successive at block {0}")]
    OverlappingBlocks(usize),
    #[error("block {0} coefficients do not have unit norm")]
    NotNormalized(usize),
    #[error("block {0} runs past the end of the system")]
    BlockOutOfRange(usize),
    #[error("comparison with {0} is undecided at the maximum precision")]
    Undecided(String),
}

/// A non-negative extended rational.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Bound {
    Finite(Rational),
    Infinite,
}

impl Bound {
    pub fn finite(&self) -> Option<&Rational> {
        match self {
            Bound::Finite(q) => Some(q),
            Bound::Infinite => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Bound::Infinite)
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Bound::Finite(q) => to_f64(q),
            Bound::Infinite => f64::INFINITY,
        }
    }
}

impl PartialOrd for Bound {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Bound {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Bound::Finite(a), Bound::Finite(b)) => a.cmp(b),
            (Bound::Finite(_), Bound::Infinite) => Ordering::Less,
            (Bound::Infinite, Bound::Finite(_)) => Ordering::Greater,
            (Bound::Infinite, Bound::Infinite) => Ordering::Equal,
        }
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::Finite(q) => write!(f, "{}", fmt_rational(q)),
            Bound::Infinite => write!(f, "inf"),
        }
    }
}

impl Serialize for Bound {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Both systems vanish identically.
    Trivial,
    /// Some coefficient vector kills the right-hand side only.
    Kernel,
    /// Both norms Euclidean: generalized eigenvalue by exact PSD bisection.
    Euclidean,
    /// Polyhedral left norm over a Euclidean right norm: exact quadratic forms.
    PolyhedralEuclidean,
    /// Maximum over the exact vertices of the right-hand unit ball.
    Vertex,
    /// Vertices of a polyhedral minorant ball (upper) and local ascent (lower).
    VertexBound,
    /// Local ascent only; the upper bound is unknown.
    Ascent,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DominationReport {
    pub lower: Bound,
    pub upper: Bound,
    pub exact: bool,
    pub method: Method,
    #[serde(with = "crate::exact::serde_rational_vec")]
    pub witness: Vec<Rational>,
}

impl DominationReport {
    fn new(lower: Bound, upper: Bound, method: Method, witness: Vec<Rational>) -> Self {
        let exact = lower == upper;
        DominationReport { lower, upper, exact, method, witness }
    }

    /// The constant, when known exactly.
    pub fn value(&self) -> Option<&Bound> {
        self.exact.then_some(&self.upper)
    }

    pub fn decide(&self, k: &Rational) -> Decision {
        let kb = Bound::Finite(k.clone());
        if self.upper <= kb {
            Decision::Holds
        } else if self.lower > kb {
            Decision::Fails { witness: self.witness.clone() }
        } else {
            Decision::Undecided
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "result", rename_all = "kebab-case")]
pub enum Decision {
    Holds,
    Fails {
        #[serde(with = "crate::exact::serde_rational_vec")]
        witness: Vec<Rational>,
    },
    Undecided,
}

#[derive(Clone, Debug)]
pub struct DominationConfig {
    pub bits: u32,
    pub vertex_cap: usize,
    pub starts: usize,
    pub seed: u64,
}

impl Default for DominationConfig {
    fn default() -> Self {
        DominationConfig { bits: DEFAULT_PRECISION_BITS, vertex_cap: DEFAULT_VERTEX_CAP, starts: 64, seed: 0x5eed }
    }
}

fn columns(vs: &[FinVector], d: &NormDescriptor) -> Result<Matrix, DominationError> {
    let dim = d.dim();
    for v in vs {
        if v.len() != dim {
            return Err(SpaceError::DimensionMismatch { expected: dim, got: v.len() }.into());
        }
    }
    Ok((0..dim).map(|i| vs.iter().map(|v| v.0[i].clone()).collect()).collect())
}

fn select_columns(m: &Matrix, cols: &[usize]) -> Matrix {
    m.iter().map(|r| cols.iter().map(|&j| r[j].clone()).collect()).collect()
}

fn lift(b: &[Rational], piv: &[usize], n: usize) -> Vec<Rational> {
    let mut a = vec![Rational::zero(); n];
    for (j, &p) in piv.iter().enumerate() {
        a[p] = b[j].clone();
    }
    a
}

/// `‖X a‖ / ‖Y a‖`, or `None` when the denominator might vanish.
pub fn ratio(
    xs: &[FinVector],
    x_space: &NormDescriptor,
    ys: &[FinVector],
    y_space: &NormDescriptor,
    a: &[Rational],
    bits: u32,
) -> Result<Option<Real>, DominationError> {
    let xm = columns(xs, x_space)?;
    let ym = columns(ys, y_space)?;
    let num = norm_with_bits(x_space, &linalg::mat_vec(&xm, a), bits)?;
    let den = norm_with_bits(y_space, &linalg::mat_vec(&ym, a), bits)?;
    Ok(num.div(&den))
}

/// Simplest rational in `[lo, hi]`, for `0 ≤ lo ≤ hi`.
fn simplest_between(lo: &Rational, hi: &Rational) -> Rational {
    let fl = lo.floor();
    if fl == *lo {
        return fl;
    }
    if &fl + Rational::one() <= *hi {
        return fl + Rational::one();
    }
    let inner = simplest_between(&(hi - &fl).recip(), &(lo - &fl).recip());
    fl + inner.recip()
}

/// Functionals `Σ ε_k part_k` of a generator, pulled back through `m`.
fn sign_functionals(g: &Generator, m: &Matrix, r: usize, fix_first: bool) -> Option<Vec<Vec<Rational>>> {
    let k = g.parts.len();
    if k >= 63 || (1usize << k) > SIGN_PATTERN_CAP {
        return None;
    }
    // Pull each part back: part · (m b) = (mᵀ part) · b.
    let pulled: Vec<Vec<Rational>> = g
        .parts
        .iter()
        .map(|p| {
            (0..r).map(|j| p.iter().fold(Rational::zero(), |acc, (i, w)| acc + w * &m[*i][j])).collect()
        })
        .collect();
    let patterns = if fix_first && k > 0 { 1usize << (k - 1) } else { 1usize << k };
    let mut out = Vec::with_capacity(patterns);
    for mask in 0..patterns {
        let mut f = vec![Rational::zero(); r];
        for (idx, p) in pulled.iter().enumerate() {
            let neg = if fix_first { idx > 0 && (mask >> (idx - 1)) & 1 == 1 } else { (mask >> idx) & 1 == 1 };
            for (fj, pj) in f.iter_mut().zip(p) {
                if neg {
                    *fj -= pj;
                } else {
                    *fj += pj;
                }
            }
        }
        out.push(f);
    }
    Some(out)
}

struct Reduced<'a> {
    x_space: &'a NormDescriptor,
    y_space: &'a NormDescriptor,
    xp: Matrix,
    yp: Matrix,
    piv: Vec<usize>,
    n: usize,
    cfg: &'a DominationConfig,
}

impl Reduced<'_> {
    fn r(&self) -> usize {
        self.piv.len()
    }

    fn exact_ratio(&self, b: &[Rational]) -> Option<Real> {
        let num = norm_with_bits(self.x_space, &linalg::mat_vec(&self.xp, b), self.cfg.bits).ok()?;
        let den = norm_with_bits(self.y_space, &linalg::mat_vec(&self.yp, b), self.cfg.bits).ok()?;
        num.div(&den)
    }

    fn euclidean(&self) -> DominationReport {
        let xt = linalg::transpose(&self.xp);
        let yt = linalg::transpose(&self.yp);
        let h = linalg::mat_mul(&xt, &self.xp);
        let g = linalg::mat_mul(&yt, &self.yp);
        let ginv = linalg::inverse(&g).expect("independent columns");
        let gh = linalg::mat_mul(&ginv, &h);
        let r = self.r();
        let pencil = |lam: &Rational| -> Matrix {
            (0..r).map(|i| (0..r).map(|j| lam * &g[i][j] - &h[i][j]).collect()).collect()
        };
        let mut lo = Rational::zero();
        let mut hi = (0..r).fold(Rational::zero(), |acc, i| acc + &gh[i][i]);
        let mut found = None;
        if linalg::is_psd(&pencil(&lo)) {
            found = Some(lo.clone());
        }
        let tol = Rational::new(num_bigint::BigInt::one(), num_bigint::BigInt::one() << (self.cfg.bits + 4));
        let mut step = 0;
        while found.is_none() && &hi - &lo > tol {
            let mid = (&lo + &hi) / int(2);
            if linalg::is_psd(&pencil(&mid)) {
                hi = mid;
            } else {
                lo = mid;
            }
            step += 1;
            if step % 8 == 0 {
                let c = simplest_between(&lo, &hi);
                if linalg::is_psd(&pencil(&c)) && linalg::det(&pencil(&c)).is_zero() {
                    found = Some(c);
                }
            }
        }
        if found.is_none() {
            let c = simplest_between(&lo, &hi);
            if linalg::is_psd(&pencil(&c)) && linalg::det(&pencil(&c)).is_zero() {
                found = Some(c);
            }
        }
        match found {
            Some(lam) => {
                let k = Real::exact(lam.clone()).sqrt(self.cfg.bits);
                let ns = linalg::nullspace(&pencil(&lam), r);
                let b = ns.into_iter().next().unwrap_or_else(|| vec![Rational::one(); r]);
                self.report(k, Method::Euclidean, b)
            }
            None => {
                let k = Real::between(lo, hi).sqrt(self.cfg.bits);
                let b = rationalized(&self.ascent().0);
                self.report(k, Method::Euclidean, b)
            }
        }
    }

    fn report(&self, k: Real, method: Method, b: Vec<Rational>) -> DominationReport {
        DominationReport::new(
            Bound::Finite(k.lo().clone()),
            Bound::Finite(k.hi().clone()),
            method,
            lift(&b, &self.piv, self.n),
        )
    }

    fn polyhedral_euclidean(&self, gens: &[Generator]) -> Option<DominationReport> {
        let r = self.r();
        let yt = linalg::transpose(&self.yp);
        let ginv = linalg::inverse(&linalg::mat_mul(&yt, &self.yp)).expect("independent columns");
        let mut best: Option<(Rational, Vec<Rational>)> = None;
        let mut count = 0usize;
        for g in gens {
            let fs = sign_functionals(g, &self.xp, r, true)?;
            count += fs.len();
            if count > SIGN_PATTERN_CAP {
                return None;
            }
            for hvec in fs {
                let w = linalg::mat_vec(&ginv, &hvec);
                let q = linalg::dot(&hvec, &w);
                if best.as_ref().is_none_or(|(b, _)| q > *b) {
                    best = Some((q, w));
                }
            }
        }
        let (lam, w) = best?;
        let k = Real::exact(lam).sqrt(self.cfg.bits);
        Some(self.report(k, Method::PolyhedralEuclidean, w))
    }

    fn constraints(&self, gens: &[Generator]) -> Option<Vec<Vec<Rational>>> {
        let mut out = Vec::new();
        for g in gens {
            out.extend(sign_functionals(g, &self.yp, self.r(), false)?);
            if out.len() > SIGN_PATTERN_CAP {
                return None;
            }
        }
        out.sort();
        out.dedup();
        Some(out)
    }

    fn vertex(&self, gens: &[Generator], exact_ball: bool) -> Option<Result<DominationReport, PolytopeError>> {
        let cons = self.constraints(gens)?;
        let verts = match polytope::vertices(&cons, self.r(), self.cfg.vertex_cap) {
            Ok(v) => v,
            Err(e) => return Some(Err(e)),
        };
        let vals: Vec<Real> = verts
            .par_iter()
            .map(|v| {
                norm_with_bits(self.x_space, &linalg::mat_vec(&self.xp, v), self.cfg.bits).expect("dimensions checked")
            })
            .collect();
        let upper = vals.iter().map(|v| v.hi().clone()).max().unwrap_or_else(Rational::zero);
        // Deterministic witness: largest lower end, ties broken towards the lexicographically largest vertex.
        let best = (0..verts.len())
            .max_by(|&i, &j| vals[i].lo().cmp(vals[j].lo()).then_with(|| verts[i].cmp(&verts[j])))
            .expect("a bounded polytope has vertices");
        if exact_ball {
            let lower = vals[best].lo().clone();
            return Some(Ok(DominationReport::new(
                Bound::Finite(lower),
                Bound::Finite(upper),
                Method::Vertex,
                lift(&verts[best], &self.piv, self.n),
            )));
        }
        let (b, lower) = self.best_lower(Some(verts[best].clone()));
        let lower = lower.min(upper.clone());
        Some(Ok(DominationReport::new(
            Bound::Finite(lower),
            Bound::Finite(upper),
            Method::VertexBound,
            lift(&b, &self.piv, self.n),
        )))
    }

    /// Rigorous lower bound: exact ratio at the best ascent point or the seed.
    fn best_lower(&self, seed: Option<Vec<Rational>>) -> (Vec<Rational>, Rational) {
        let mut cands = vec![rationalized(&self.ascent().0)];
        cands.extend(seed);
        let mut best = (cands[0].clone(), Rational::zero());
        for b in cands {
            if let Some(r) = self.exact_ratio(&b) {
                if *r.lo() > best.1 {
                    best = (b, r.lo().clone());
                }
            }
        }
        best
    }

    fn ascent(&self) -> (Vec<f64>, f64) {
        let r = self.r();
        let xf: Vec<Vec<f64>> = self.xp.iter().map(|row| row.iter().map(to_f64).collect()).collect();
        let yf: Vec<Vec<f64>> = self.yp.iter().map(|row| row.iter().map(to_f64).collect()).collect();
        let apply = |m: &[Vec<f64>], b: &[f64]| -> Vec<f64> {
            m.iter().map(|row| row.iter().zip(b).map(|(a, c)| a * c).sum()).collect()
        };
        let objective = |b: &[f64]| -> f64 {
            let den = norm_f64(self.y_space, &apply(&yf, b));
            if den <= 1e-300 {
                return 0.0;
            }
            norm_f64(self.x_space, &apply(&xf, b)) / den
        };
        let mut starts: Vec<Vec<f64>> = Vec::new();
        if r <= ORTHANT_SEED_MAX_DIM {
            for mask in 0..(1usize << r.saturating_sub(1)) {
                starts.push((0..r).map(|i| if i > 0 && (mask >> (i - 1)) & 1 == 1 { -1.0 } else { 1.0 }).collect());
            }
        }
        for i in 0..r {
            let mut e = vec![0.0; r];
            e[i] = 1.0;
            starts.push(e);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed);
        while starts.len() < self.cfg.starts.max(1) {
            starts.push((0..r).map(|_| rng.gen_range(-1.0..1.0)).collect());
        }
        starts.truncate(self.cfg.starts.max(r + 1));
        starts
            .par_iter()
            .map(|s| coordinate_search(s.clone(), &objective))
            .reduce(|| (vec![1.0; r], f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a })
    }
}

fn coordinate_search(mut b: Vec<f64>, objective: &dyn Fn(&[f64]) -> f64) -> (Vec<f64>, f64) {
    let mut val = objective(&b);
    let mut step = 0.5;
    let mut iters = 0;
    while step > 1e-9 && iters < 4000 {
        iters += 1;
        let mut improved = false;
        for i in 0..b.len() {
            for dir in [1.0, -1.0] {
                let mut c = b.clone();
                c[i] += dir * step;
                let v = objective(&c);
                if v > val * (1.0 + 1e-15) {
                    let scale = c.iter().fold(0.0f64, |m, x| m.max(x.abs()));
                    if scale > 0.0 {
                        c.iter_mut().for_each(|x| *x /= scale);
                    }
                    b = c;
                    val = v;
                    improved = true;
                }
            }
        }
        if !improved {
            step /= 2.0;
        }
    }
    (b, val)
}

fn rationalized(b: &[f64]) -> Vec<Rational> {
    b.iter().map(|&x| approx_f64(x)).collect()
}

/// The least `K` with `(xs) ≲_K (ys)`.
pub fn domination_constant(
    xs: &[FinVector],
    x_space: &NormDescriptor,
    ys: &[FinVector],
    y_space: &NormDescriptor,
) -> Result<DominationReport, DominationError> {
    domination_constant_with(xs, x_space, ys, y_space, &DominationConfig::default())
}

pub fn domination_constant_with(
    xs: &[FinVector],
    x_space: &NormDescriptor,
    ys: &[FinVector],
    y_space: &NormDescriptor,
    cfg: &DominationConfig,
) -> Result<DominationReport, DominationError> {
    if xs.len() != ys.len() {
        return Err(DominationError::LengthMismatch(xs.len(), ys.len()));
    }
    let n = xs.len();
    if n == 0 {
        return Err(DominationError::Empty);
    }
    let xm = columns(xs, x_space)?;
    let ym = columns(ys, y_space)?;

    for k in linalg::nullspace(&ym, n) {
        if linalg::mat_vec(&xm, &k).iter().any(|v| !v.is_zero()) {
            return Ok(DominationReport::new(Bound::Infinite, Bound::Infinite, Method::Kernel, k));
        }
    }
    // X vanishes on ker Y, so both sides factor through the pivot columns of Y.
    let piv = linalg::pivot_columns(&ym);
    if piv.is_empty() {
        let mut w = vec![Rational::zero(); n];
        w[0] = Rational::one();
        return Ok(DominationReport::new(Bound::Finite(Rational::zero()), Bound::Finite(Rational::zero()), Method::Trivial, w));
    }
    let red = Reduced {
        x_space,
        y_space,
        xp: select_columns(&xm, &piv),
        yp: select_columns(&ym, &piv),
        piv,
        n,
        cfg,
    };
    if linalg::rank(&red.xp) == 0 {
        let w = lift(&vec![Rational::one(); red.r()], &red.piv, n);
        return Ok(DominationReport::new(Bound::Finite(Rational::zero()), Bound::Finite(Rational::zero()), Method::Trivial, w));
    }

    let x_gens = polyhedral_generators(x_space);
    let y_gens = polyhedral_generators(y_space);
    if y_space.is_euclidean() {
        if x_space.is_euclidean() {
            return Ok(red.euclidean());
        }
        if let Some(g) = &x_gens {
            if let Some(rep) = red.polyhedral_euclidean(g) {
                return Ok(rep);
            }
        }
    }
    let (gens, exact_ball) = match y_gens {
        Some(g) => (g, true),
        None => (minorant_generators(y_space, cfg.bits), false),
    };
    if let Some(Ok(rep)) = red.vertex(&gens, exact_ball) {
        return Ok(rep);
    }
    let (b, lower) = red.best_lower(None);
    Ok(DominationReport::new(Bound::Finite(lower), Bound::Infinite, Method::Ascent, lift(&b, &red.piv, n)))
}

/// Decides `(xs) ≲_k (ys)`, refining precision before giving up.
pub fn is_dominated(
    xs: &[FinVector],
    x_space: &NormDescriptor,
    ys: &[FinVector],
    y_space: &NormDescriptor,
    k: &Rational,
) -> Result<Decision, DominationError> {
    let mut cfg = DominationConfig::default();
    for bits in [DEFAULT_PRECISION_BITS, 2 * DEFAULT_PRECISION_BITS, 4 * DEFAULT_PRECISION_BITS] {
        cfg.bits = bits;
        let rep = domination_constant_with(xs, x_space, ys, y_space, &cfg)?;
        match rep.decide(k) {
            Decision::Undecided if matches!(rep.method, Method::Euclidean | Method::PolyhedralEuclidean) => continue,
            d => return Ok(d),
        }
    }
    Ok(Decision::Undecided)
}

/// Operator norm of a matrix between its descriptors.
pub fn operator_norm(m: &OperatorMatrix) -> Result<DominationReport, DominationError> {
    let n = m.cols();
    let images: Vec<FinVector> = (0..n).map(|j| m.column(j)).collect();
    let units: Vec<FinVector> = (0..n).map(|j| FinVector::unit(n, j)).collect();
    domination_constant(&images, &m.codomain, &units, &m.domain)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "result", rename_all = "kebab-case")]
pub enum KBasic {
    Basic,
    Violation {
        #[serde(with = "crate::exact::serde_rational_vec")]
        a: Vec<Rational>,
        m: usize,
        n: usize,
    },
}

/// Checks `‖Σ_{i≤m} a_i x_i‖ ≤ K ‖Σ_{i≤n} a_i x_i‖` for all `m ≤ n`.
pub fn is_k_basic(xs: &[FinVector], space: &NormDescriptor, k: &Rational) -> Result<KBasic, DominationError> {
    for n in 2..=xs.len() {
        let full = &xs[..n];
        for m in 1..n {
            let mut proj: Vec<FinVector> = xs[..m].to_vec();
            proj.extend((m..n).map(|_| FinVector::zeros(space.dim())));
            match is_dominated(&proj, space, full, space, k)? {
                Decision::Holds => {}
                Decision::Fails { witness } => return Ok(KBasic::Violation { a: witness, m, n }),
                Decision::Undecided => return Err(DominationError::Undecided(fmt_rational(k))),
            }
        }
    }
    Ok(KBasic::Basic)
}

/// One block `y = Σ_{i} coeffs[i] x_{start+i}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Block {
    pub start: usize,
    pub coeffs: Vec<Rational>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BlockOutput {
    pub vectors: Vec<FinVector>,
    /// False when some block has ℓ_p norm 1 only up to the certified tolerance.
    pub exactly_normalized: bool,
}

/// `p`-absolutely convex blocks: successive combinations with unit ℓ_p coefficient norm.
pub fn p_abs_convex_block(
    xs: &[FinVector],
    p: &Exponent,
    blocks: &[Block],
    tolerance: f64,
) -> Result<BlockOutput, DominationError> {
    let mut end = 0;
    let mut exactly = true;
    let mut out = Vec::with_capacity(blocks.len());
    for (j, b) in blocks.iter().enumerate() {
        if b.coeffs.is_empty() || b.start < end {
            return Err(DominationError::OverlappingBlocks(j));
        }
        if b.start + b.coeffs.len() > xs.len() {
            return Err(DominationError::BlockOutOfRange(j));
        }
        end = b.start + b.coeffs.len();
        let lp = NormDescriptor::lp(p.clone(), b.coeffs.len())?;
        let nrm = norm_with_bits(&lp, &b.coeffs, DEFAULT_PRECISION_BITS)?;
        match nrm.as_exact() {
            Some(q) if q.is_one() => {}
            Some(_) => return Err(DominationError::NotNormalized(j)),
            None => {
                let one = Rational::one();
                let off = (nrm.lo() - &one).abs().max((nrm.hi() - &one).abs());
                if to_f64(&off) > tolerance {
                    return Err(DominationError::NotNormalized(j));
                }
                exactly = false;
            }
        }
        let dim = xs[0].len();
        out.push(FinVector::combination(&xs[b.start..end], &b.coeffs, dim));
    }
    Ok(BlockOutput { vectors: out, exactly_normalized: exactly })
}
