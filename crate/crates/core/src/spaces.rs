//! Finite-dimensional normed spaces built from a small descriptor language,
//! evaluated exactly (rationals) or as certified intervals.
//!
//! Every descriptor except `Summing` has a 1-unconditional basis, so its
//! norm is monotone in the absolute values of the coordinates. The
//! evaluation code is generic over [`Scalar`], instantiated with [`Real`]
//! for certified values and with `f64` for fast searches.

use std::collections::HashMap;
use std::fmt;
use std::rc::Rc;
use std::str::FromStr;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::exact::{
    approx_f64, fmt_rational, int, lp_l1_floor, parse_rational, to_f64, Exponent, Rational, Real,
    DEFAULT_PRECISION_BITS,
};
use crate::families::{restrict, FamilyError, FamilyExpr};
use crate::ordinal::{Kind, Ordinal, OrdinalError};

/// Default certified-interval width for irrational norms.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;
/// Largest total dimension [`w_space_approx`] will build.
pub const DEFAULT_DIMENSION_BUDGET: usize = 4096;
const GENERATOR_CAP: usize = 200_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpaceError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid descriptor: {0}")]
    InvalidDescriptor(String),
    #[error("interval width {width:e} exceeds tolerance {tolerance:e}")]
    TooWide { width: f64, tolerance: f64 },
    #[error("columns {0} and {1} have overlapping supports")]
    OverlappingSupports(usize, usize),
    #[error("selection is not a downward-closed subset of the tree")]
    SelectionNotClosed,
    #[error("dimension budget {0} exceeded")]
    DimensionBudget(usize),
    #[error(transparent)]
    Ordinal(#[from] OrdinalError),
    #[error(transparent)]
    Family(#[from] FamilyError),
}

/// Arithmetic needed by the norm evaluators. `mul`, `powr` and `rootr` are
/// only applied to non-negative values.
pub trait Scalar: Clone + fmt::Debug {
    fn zero() -> Self;
    fn from_rational(q: &Rational) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn max(&self, o: &Self) -> Self;
    fn abs(&self) -> Self;
    fn powr(&self, p: &Rational, bits: u32) -> Self;
    fn rootr(&self, p: &Rational, bits: u32) -> Self;
}

impl Scalar for Real {
    fn zero() -> Self {
        Real::zero()
    }
    fn from_rational(q: &Rational) -> Self {
        Real::exact(q.clone())
    }
    fn add(&self, o: &Self) -> Self {
        Real::add(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        Real::mul(self, o)
    }
    fn max(&self, o: &Self) -> Self {
        Real::max(self, o)
    }
    fn abs(&self) -> Self {
        Real::abs(self)
    }
    fn powr(&self, p: &Rational, bits: u32) -> Self {
        if p.is_one() {
            self.clone()
        } else {
            Real::powr(self, p, bits)
        }
    }
    fn rootr(&self, p: &Rational, bits: u32) -> Self {
        if p.is_one() {
            self.clone()
        } else {
            Real::powr(self, &p.recip(), bits)
        }
    }
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn from_rational(q: &Rational) -> Self {
        to_f64(q)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn max(&self, o: &Self) -> Self {
        f64::max(*self, *o)
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    fn powr(&self, p: &Rational, _bits: u32) -> Self {
        if p.is_one() {
            *self
        } else if *p == int(2) {
            self * self
        } else {
            self.powf(to_f64(p))
        }
    }
    fn rootr(&self, p: &Rational, _bits: u32) -> Self {
        if p.is_one() {
            *self
        } else if *p == int(2) {
            self.sqrt()
        } else {
            self.powf(1.0 / to_f64(p))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum NormDescriptor {
    Lp { p: Exponent, dim: usize },
    Schreier { xi: Ordinal, dim: usize },
    XXi2 { xi: Ordinal, dim: usize },
    /// Coordinates are indexed by `nodes` in lexicographic order.
    Zpq { p: Rational, q: Rational, nodes: Vec<Vec<u32>> },
    Convexify { base: Box<NormDescriptor>, p: Rational },
    DirectSum { outer: Box<NormDescriptor>, inners: Vec<NormDescriptor> },
    Summing { dim: usize },
}

fn validate_nodes(nodes: &mut Vec<Vec<u32>>) -> Result<(), SpaceError> {
    nodes.sort();
    nodes.dedup();
    if nodes.is_empty() || !nodes[0].is_empty() {
        return Err(SpaceError::InvalidDescriptor("tree must contain the empty sequence".into()));
    }
    for s in nodes.iter() {
        if !s.is_empty() && nodes.binary_search(&s[..s.len() - 1].to_vec()).is_err() {
            return Err(SpaceError::InvalidDescriptor(format!("tree is not downward closed at {s:?}")));
        }
    }
    Ok(())
}

impl NormDescriptor {
    pub fn lp(p: Exponent, dim: usize) -> Result<Self, SpaceError> {
        NormDescriptor::Lp { p, dim }.validated()
    }

    pub fn schreier(xi: Ordinal, dim: usize) -> Result<Self, SpaceError> {
        NormDescriptor::Schreier { xi, dim }.validated()
    }

    pub fn xxi2(xi: Ordinal, dim: usize) -> Result<Self, SpaceError> {
        NormDescriptor::XXi2 { xi, dim }.validated()
    }

    pub fn zpq(p: Rational, q: Rational, mut nodes: Vec<Vec<u32>>) -> Result<Self, SpaceError> {
        validate_nodes(&mut nodes)?;
        NormDescriptor::Zpq { p, q, nodes }.validated()
    }

    pub fn convexify(base: NormDescriptor, p: Rational) -> Result<Self, SpaceError> {
        NormDescriptor::Convexify { base: Box::new(base), p }.validated()
    }

    pub fn direct_sum(outer: NormDescriptor, inners: Vec<NormDescriptor>) -> Result<Self, SpaceError> {
        NormDescriptor::DirectSum { outer: Box::new(outer), inners }.validated()
    }

    pub fn summing(dim: usize) -> Result<Self, SpaceError> {
        NormDescriptor::Summing { dim }.validated()
    }

    fn validated(self) -> Result<Self, SpaceError> {
        self.validate()?;
        Ok(self)
    }

    /// Structural checks; constructors call this, and so does parsing.
    pub fn validate(&self) -> Result<(), SpaceError> {
        let bad = |m: &str| Err(SpaceError::InvalidDescriptor(m.into()));
        match self {
            NormDescriptor::Lp { dim, .. }
            | NormDescriptor::Schreier { dim, .. }
            | NormDescriptor::XXi2 { dim, .. }
            | NormDescriptor::Summing { dim } => {
                if *dim == 0 {
                    return bad("dimension must be positive");
                }
                if matches!(self, NormDescriptor::Schreier { .. } | NormDescriptor::XXi2 { .. }) && *dim > 64 {
                    return bad("Schreier-type dimension above 64");
                }
            }
            NormDescriptor::Zpq { p, q, nodes } => {
                if *p < Rational::one() || *q < Rational::one() {
                    return bad("Z(p,q) needs 1 <= p, q < inf");
                }
                let mut n = nodes.clone();
                validate_nodes(&mut n)?;
                if n != *nodes {
                    return bad("Z(p,q) nodes must be sorted and distinct");
                }
            }
            NormDescriptor::Convexify { base, p } => {
                if *p < Rational::one() {
                    return bad("convexification exponent must be >= 1");
                }
                if !base.is_lattice() {
                    return bad("convexification needs a 1-unconditional base");
                }
                base.validate()?;
            }
            NormDescriptor::DirectSum { outer, inners } => {
                if !outer.is_lattice() {
                    return bad("direct-sum outer norm must be 1-unconditional");
                }
                if outer.dim() != inners.len() {
                    return Err(SpaceError::DimensionMismatch { expected: outer.dim(), got: inners.len() });
                }
                outer.validate()?;
                for i in inners {
                    i.validate()?;
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        match self {
            NormDescriptor::Lp { dim, .. }
            | NormDescriptor::Schreier { dim, .. }
            | NormDescriptor::XXi2 { dim, .. }
            | NormDescriptor::Summing { dim } => *dim,
            NormDescriptor::Zpq { nodes, .. } => nodes.len(),
            NormDescriptor::Convexify { base, .. } => base.dim(),
            NormDescriptor::DirectSum { inners, .. } => inners.iter().map(|d| d.dim()).sum(),
        }
    }

    /// Whether the norm depends only on coordinate absolute values.
    pub fn is_lattice(&self) -> bool {
        match self {
            NormDescriptor::Summing { dim } => *dim == 1,
            NormDescriptor::DirectSum { outer, inners } => outer.is_lattice() && inners.iter().all(|i| i.is_lattice()),
            NormDescriptor::Convexify { base, .. } => base.is_lattice(),
            _ => true,
        }
    }

    pub fn is_euclidean(&self) -> bool {
        match self {
            NormDescriptor::Lp { p, .. } => p.is_two(),
            NormDescriptor::Convexify { base, p } => {
                *p == int(2) && matches!(&**base, NormDescriptor::Lp { p, .. } if p.is_one())
            }
            _ => false,
        }
    }
}

impl fmt::Display for NormDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormDescriptor::Lp { p, dim } => write!(f, "lp({p},{dim})"),
            NormDescriptor::Schreier { xi, dim } => write!(f, "schreier({xi},{dim})"),
            NormDescriptor::XXi2 { xi, dim } => write!(f, "xxi2({xi},{dim})"),
            NormDescriptor::Zpq { p, q, nodes } => {
                write!(f, "z({},{},[", fmt_rational(p), fmt_rational(q))?;
                for (i, s) in nodes.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    let parts: Vec<String> = s.iter().map(|x| x.to_string()).collect();
                    write!(f, "[{}]", parts.join(","))?;
                }
                write!(f, "])")
            }
            NormDescriptor::Convexify { base, p } => write!(f, "conv({base},{})", fmt_rational(p)),
            NormDescriptor::DirectSum { outer, inners } => {
                write!(f, "dsum({outer};")?;
                for (i, d) in inners.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, " {d}")?;
                }
                write!(f, ")")
            }
            NormDescriptor::Summing { dim } => write!(f, "summing({dim})"),
        }
    }
}

/// Splits at `sep` occurring outside any bracket pair.
fn split_top(s: &str, sep: char) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '(' | '[' | '{' => depth += 1,
            ')' | ']' | '}' => depth -= 1,
            c if c == sep && depth == 0 => {
                out.push(s[start..i].trim());
                start = i + c.len_utf8();
            }
            _ => {}
        }
    }
    out.push(s[start..].trim());
    out
}

fn parse_usize(s: &str) -> Result<usize, SpaceError> {
    s.trim().parse().map_err(|_| SpaceError::Parse(format!("expected a dimension, got `{s}`")))
}

fn parse_tree_nodes(s: &str) -> Result<Vec<Vec<u32>>, SpaceError> {
    let v: Vec<Vec<u32>> =
        serde_json::from_str(s).map_err(|e| SpaceError::Parse(format!("tree node list: {e}")))?;
    Ok(v)
}

fn parse_rat(s: &str) -> Result<Rational, SpaceError> {
    parse_rational(s).map_err(|e| SpaceError::Parse(e.to_string()))
}

impl FromStr for NormDescriptor {
    type Err = SpaceError;

    /// `lp(2,4)`, `lp(inf,3)`, `schreier(1,6)`, `xxi2(w,6)`,
    /// `z(1,2,[[],[1],[1,1]])`, `conv(<d>,2)`, `dsum(<outer>; <d>, <d>)`,
    /// `summing(5)`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let open = s.find('(').ok_or_else(|| SpaceError::Parse(format!("expected `name(...)`, got `{s}`")))?;
        if !s.ends_with(')') {
            return Err(SpaceError::Parse(format!("missing `)` in `{s}`")));
        }
        let name = s[..open].trim();
        let body = &s[open + 1..s.len() - 1];
        let args = split_top(body, ',');
        let want = |n: usize| -> Result<(), SpaceError> {
            if args.len() == n {
                Ok(())
            } else {
                Err(SpaceError::Parse(format!("`{name}` takes {n} arguments, got {}", args.len())))
            }
        };
        let d = match name {
            "lp" => {
                want(2)?;
                let p: Exponent = args[0].parse().map_err(|e: crate::exact::ExponentError| SpaceError::Parse(e.to_string()))?;
                NormDescriptor::Lp { p, dim: parse_usize(args[1])? }
            }
            "schreier" | "xxi2" => {
                want(2)?;
                let xi: Ordinal = args[0].parse()?;
                let dim = parse_usize(args[1])?;
                if name == "schreier" {
                    NormDescriptor::Schreier { xi, dim }
                } else {
                    NormDescriptor::XXi2 { xi, dim }
                }
            }
            "z" => {
                want(3)?;
                let mut nodes = parse_tree_nodes(args[2])?;
                validate_nodes(&mut nodes)?;
                NormDescriptor::Zpq { p: parse_rat(args[0])?, q: parse_rat(args[1])?, nodes }
            }
            "conv" => {
                want(2)?;
                NormDescriptor::Convexify { base: Box::new(args[0].parse()?), p: parse_rat(args[1])? }
            }
            "dsum" => {
                let halves = split_top(body, ';');
                if halves.len() != 2 {
                    return Err(SpaceError::Parse("`dsum` expects `outer; inner, ...`".into()));
                }
                let outer: NormDescriptor = halves[0].parse()?;
                let inners = split_top(halves[1], ',')
                    .into_iter()
                    .filter(|x| !x.is_empty())
                    .map(str::parse)
                    .collect::<Result<Vec<NormDescriptor>, _>>()?;
                NormDescriptor::DirectSum { outer: Box::new(outer), inners }
            }
            "summing" => {
                want(1)?;
                NormDescriptor::Summing { dim: parse_usize(args[0])? }
            }
            other => return Err(SpaceError::Parse(format!("unknown descriptor `{other}`"))),
        };
        d.validate()?;
        Ok(d)
    }
}

impl Serialize for NormDescriptor {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for NormDescriptor {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// Exact coordinates of a vector.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct FinVector(pub Vec<Rational>);

impl FinVector {
    pub fn new(v: Vec<Rational>) -> Self {
        FinVector(v)
    }

    pub fn zeros(n: usize) -> Self {
        FinVector(vec![Rational::zero(); n])
    }

    pub fn unit(n: usize, i: usize) -> Self {
        let mut v = FinVector::zeros(n);
        v.0[i] = Rational::one();
        v
    }

    pub fn from_ints(v: &[i64]) -> Self {
        FinVector(v.iter().map(|&x| int(x)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn coords(&self) -> &[Rational] {
        &self.0
    }

    pub fn scale(&self, c: &Rational) -> FinVector {
        FinVector(self.0.iter().map(|x| x * c).collect())
    }

    pub fn add(&self, o: &FinVector) -> FinVector {
        FinVector(self.0.iter().zip(&o.0).map(|(a, b)| a + b).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    /// `Σ a_i v_i`.
    pub fn combination(vs: &[FinVector], a: &[Rational], dim: usize) -> FinVector {
        let mut out = vec![Rational::zero(); dim];
        for (v, c) in vs.iter().zip(a) {
            if c.is_zero() {
                continue;
            }
            for (o, x) in out.iter_mut().zip(&v.0) {
                *o += x * c;
            }
        }
        FinVector(out)
    }
}

impl fmt::Display for FinVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(fmt_rational).collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

impl FromStr for FinVector {
    type Err = SpaceError;

    /// A comma list of rationals; brackets and parentheses are ignored, so
    /// nested block notation such as `((1,1),(0,0))` flattens.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let flat: String = s.chars().filter(|c| !matches!(c, '[' | ']' | '(' | ')')).collect();
        let v = flat
            .split(',')
            .map(str::trim)
            .filter(|p| !p.is_empty())
            .map(parse_rat)
            .collect::<Result<Vec<_>, _>>()?;
        Ok(FinVector(v))
    }
}

impl Serialize for FinVector {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        crate::exact::serde_rational_vec::serialize(&self.0, s)
    }
}

impl<'de> Deserialize<'de> for FinVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        crate::exact::serde_rational_vec::deserialize(d).map(FinVector)
    }
}

// ---------------------------------------------------------------------------
// Evaluation

/// `table[a * d + b]` is the largest `Σ_{i∈E} w_i` over `E ∈ S_ξ` inside the
/// window `[a, b]` (0-based positions, element `i + 1`).
struct SchreierTables<S> {
    w: Vec<S>,
    memo: HashMap<Ordinal, Rc<Vec<S>>>,
}

impl<S: Scalar> SchreierTables<S> {
    fn new(w: Vec<S>) -> Self {
        SchreierTables { w, memo: HashMap::new() }
    }

    fn table(&mut self, xi: &Ordinal) -> Rc<Vec<S>> {
        if let Some(t) = self.memo.get(xi) {
            return t.clone();
        }
        let d = self.w.len();
        let mut t = vec![S::zero(); d * d];
        match xi.classify() {
            Kind::Zero => {
                for a in 0..d {
                    let mut m = S::zero();
                    for b in a..d {
                        m = m.max(&self.w[b]);
                        t[a * d + b] = m.clone();
                    }
                }
            }
            Kind::Successor(pred) => {
                let inner = self.table(&pred);
                for b in 0..d {
                    // q[i][k]: best over [i, b] split into at most k windows.
                    let mut q: Vec<Vec<S>> = vec![vec![S::zero(); d + 2]; b + 2];
                    for i in (0..=b).rev() {
                        let kmax = (b - i + 1).min(i + 1);
                        for k in 1..=kmax {
                            let mut best = S::zero();
                            for j in i..=b {
                                let rest = if j < b { q[j + 1][(k - 1).min(b - j)].clone() } else { S::zero() };
                                best = best.max(&inner[i * d + j].add(&rest));
                            }
                            q[i][k] = best;
                        }
                    }
                    let mut run = S::zero();
                    for a in (0..=b).rev() {
                        let k = (b - a + 1).min(a + 1);
                        run = run.max(&q[a][k]);
                        t[a * d + b] = run.clone();
                    }
                }
            }
            Kind::Limit => {
                let subs: Vec<Rc<Vec<S>>> =
                    (1..=d as u64).map(|n| self.table(&xi.fundamental(n).expect("limit"))).collect();
                for b in 0..d {
                    let mut run = S::zero();
                    for a in (0..=b).rev() {
                        for sub in subs.iter().take(a + 1) {
                            run = run.max(&sub[a * d + b]);
                        }
                        t[a * d + b] = run.clone();
                    }
                }
            }
        }
        let t = Rc::new(t);
        self.memo.insert(xi.clone(), t.clone());
        t
    }
}

fn zpq_eval<S: Scalar>(p: &Rational, q: &Rational, nodes: &[Vec<u32>], x: &[S], bits: u32) -> S {
    let n = nodes.len();
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, s) in nodes.iter().enumerate().skip(1) {
        let parent = nodes.binary_search(&s[..s.len() - 1].to_vec()).expect("downward closed");
        children[parent].push(i);
    }
    let mass: Vec<S> = x.iter().map(|v| v.abs().powr(p, bits)).collect();
    let phi_exp = q / p;
    let mut f: Vec<S> = vec![S::zero(); n];
    let mut child_sum: Vec<S> = vec![S::zero(); n];
    // Lexicographic order lists parents before children.
    for v in (0..n).rev() {
        let mut cs = S::zero();
        for &c in &children[v] {
            cs = cs.add(&f[c]);
        }
        child_sum[v] = cs.clone();
        let mut best = cs;
        // (node u, mass of the segment v..u, value of subtrees hanging off v..u above u)
        let mut stack = vec![(v, mass[v].clone(), S::zero())];
        while let Some((u, m, off)) = stack.pop() {
            let cand = m.powr(&phi_exp, bits).add(&off).add(&child_sum[u]);
            best = best.max(&cand);
            for &c in &children[u] {
                let mut side = off.clone();
                for &c2 in &children[u] {
                    if c2 != c {
                        side = side.add(&f[c2]);
                    }
                }
                stack.push((c, m.add(&mass[c]), side));
            }
        }
        f[v] = best;
    }
    f[0].rootr(q, bits)
}

fn eval<S: Scalar>(d: &NormDescriptor, x: &[S], bits: u32) -> S {
    match d {
        NormDescriptor::Lp { p, .. } => match p {
            Exponent::Infinity => x.iter().fold(S::zero(), |m, v| m.max(&v.abs())),
            Exponent::Finite(p) => {
                let s = x.iter().fold(S::zero(), |acc, v| acc.add(&v.abs().powr(p, bits)));
                s.rootr(p, bits)
            }
        },
        NormDescriptor::Schreier { xi, .. } => {
            let w: Vec<S> = x.iter().map(|v| v.abs()).collect();
            let n = w.len();
            let mut tables = SchreierTables::new(w);
            tables.table(xi)[n - 1].clone()
        }
        NormDescriptor::XXi2 { xi, .. } => {
            let w: Vec<S> = x.iter().map(|v| v.abs()).collect();
            let n = w.len();
            let mut tables = SchreierTables::new(w);
            let t = tables.table(xi);
            // h[j]: best sum of squared block weights using coordinates < j.
            let mut h: Vec<S> = vec![S::zero(); n + 1];
            for j in 1..=n {
                let mut best = h[j - 1].clone();
                for a in 0..j {
                    let blk = &t[a * n + (j - 1)];
                    best = best.max(&h[a].add(&blk.mul(blk)));
                }
                h[j] = best;
            }
            h[n].rootr(&int(2), bits)
        }
        NormDescriptor::Zpq { p, q, nodes } => zpq_eval(p, q, nodes, x, bits),
        NormDescriptor::Convexify { base, p } => {
            let y: Vec<S> = x.iter().map(|v| v.abs().powr(p, bits)).collect();
            eval(base, &y, bits).rootr(p, bits)
        }
        NormDescriptor::DirectSum { outer, inners } => {
            let mut u = Vec::with_capacity(inners.len());
            let mut off = 0;
            for inner in inners {
                let k = inner.dim();
                u.push(eval(inner, &x[off..off + k], bits));
                off += k;
            }
            eval(outer, &u, bits)
        }
        NormDescriptor::Summing { .. } => {
            let mut s = S::zero();
            let mut best = S::zero();
            for v in x {
                s = s.add(v);
                best = best.max(&s.abs());
            }
            best
        }
    }
}

fn check_dim(d: &NormDescriptor, n: usize) -> Result<(), SpaceError> {
    if d.dim() != n {
        return Err(SpaceError::DimensionMismatch { expected: d.dim(), got: n });
    }
    Ok(())
}

/// The norm of `v`, exact when rational and otherwise a certified interval
/// of width about `2^-bits` relative to the value.
pub fn norm_with_bits(d: &NormDescriptor, v: &[Rational], bits: u32) -> Result<Real, SpaceError> {
    check_dim(d, v.len())?;
    let x: Vec<Real> = v.iter().map(|q| Real::exact(q.clone())).collect();
    Ok(eval(d, &x, bits))
}

pub fn norm(d: &NormDescriptor, v: &FinVector) -> Result<Real, SpaceError> {
    norm_with_bits(d, &v.0, DEFAULT_PRECISION_BITS)
}

/// Like [`norm`], failing when the certified interval is wider than `tolerance`.
pub fn norm_checked(d: &NormDescriptor, v: &FinVector, tolerance: f64) -> Result<Real, SpaceError> {
    let r = norm(d, v)?;
    let width = to_f64(&r.width());
    if width > tolerance {
        return Err(SpaceError::TooWide { width, tolerance });
    }
    Ok(r)
}

/// Norm of an interval vector; valid because every evaluation step is
/// monotone in its interval inputs.
pub fn norm_interval(d: &NormDescriptor, v: &[Real], bits: u32) -> Result<Real, SpaceError> {
    check_dim(d, v.len())?;
    Ok(eval(d, v, bits))
}

/// Floating-point evaluation, for searches.
pub fn norm_f64(d: &NormDescriptor, v: &[f64]) -> f64 {
    assert_eq!(d.dim(), v.len(), "dimension mismatch");
    eval(d, v, 0)
}

// ---------------------------------------------------------------------------
// Polyhedral structure

/// A sparse vector `(index, weight)`.
pub type Part = Vec<(usize, Rational)>;

/// A family of functionals `Σ_k ε_k part_k` over all sign choices `ε`.
/// A polyhedral norm is the maximum over its generators of `Σ_k |part_k · x|`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Generator {
    pub parts: Vec<Part>,
}

impl Generator {
    pub fn value(&self, x: &[Rational]) -> Rational {
        self.parts
            .iter()
            .map(|p| p.iter().fold(Rational::zero(), |acc, (i, w)| acc + w * &x[*i]).abs())
            .fold(Rational::zero(), |a, b| a + b)
    }

    fn shifted(&self, off: usize, scale: &Rational) -> Vec<Part> {
        self.parts
            .iter()
            .map(|p| p.iter().map(|(i, w)| (i + off, w * scale)).collect())
            .collect()
    }

    fn is_coordinatewise(&self) -> bool {
        self.parts.iter().all(|p| p.len() == 1 && !p[0].1.is_negative())
    }
}

fn coordinate_generators(weights: &[Rational]) -> Vec<Generator> {
    weights
        .iter()
        .enumerate()
        .filter(|(_, w)| w.is_positive())
        .map(|(i, w)| Generator { parts: vec![vec![(i, w.clone())]] })
        .collect()
}

fn l1_generator(weights: &[Rational]) -> Generator {
    Generator { parts: weights.iter().enumerate().map(|(i, w)| vec![(i, w.clone())]).collect() }
}

fn schreier_generators(xi: &Ordinal, dim: usize) -> Result<Vec<Generator>, SpaceError> {
    let fam = restrict(&FamilyExpr::schreier(xi.clone()), dim as u32)?;
    let sets = fam.sets();
    let members: std::collections::HashSet<Vec<u32>> = sets.iter().map(|s| s.elems().to_vec()).collect();
    let mut out = Vec::new();
    for s in &sets {
        let e = s.elems();
        let extendable = (1..=dim as u32).filter(|k| !e.contains(k)).any(|k| {
            let mut t = e.to_vec();
            t.push(k);
            t.sort_unstable();
            members.contains(&t)
        });
        if !extendable && !e.is_empty() {
            out.push(Generator { parts: e.iter().map(|&i| vec![(i as usize - 1, Rational::one())]).collect() });
        }
    }
    Ok(out)
}

fn product_generators(
    outer: &[Generator],
    inners: &[Vec<Generator>],
    offsets: &[usize],
    cap: usize,
) -> Option<Vec<Generator>> {
    let mut out = Vec::new();
    for g in outer {
        if !g.is_coordinatewise() {
            return None;
        }
        let mut partial: Vec<Vec<Part>> = vec![Vec::new()];
        for part in &g.parts {
            let (blk, w) = &part[0];
            let mut next = Vec::with_capacity(partial.len() * inners[*blk].len());
            for pre in &partial {
                for ig in &inners[*blk] {
                    let mut v = pre.clone();
                    v.extend(ig.shifted(offsets[*blk], w));
                    next.push(v);
                    if next.len() > cap {
                        return None;
                    }
                }
            }
            partial = next;
        }
        out.extend(partial.into_iter().map(|parts| Generator { parts }));
        if out.len() > cap {
            return None;
        }
    }
    Some(out)
}

fn block_offsets(inners: &[NormDescriptor]) -> Vec<usize> {
    let mut offs = Vec::with_capacity(inners.len());
    let mut o = 0;
    for i in inners {
        offs.push(o);
        o += i.dim();
    }
    offs
}

/// Exact generators when the unit ball is a polytope this crate can
/// describe: ℓ₁, ℓ_∞, Schreier, summing, one-dimensional spaces, trivial
/// convexifications, and direct sums of these under a polyhedral lattice
/// outer norm.
pub fn polyhedral_generators(d: &NormDescriptor) -> Option<Vec<Generator>> {
    let ones = |n: usize| vec![Rational::one(); n];
    match d {
        _ if d.dim() == 1 && !matches!(d, NormDescriptor::DirectSum { .. }) => {
            let c = norm(d, &FinVector::unit(1, 0)).ok()?;
            Some(vec![Generator { parts: vec![vec![(0, c.as_exact()?.clone())]] }])
        }
        NormDescriptor::Lp { p: Exponent::Infinity, dim } => Some(coordinate_generators(&ones(*dim))),
        NormDescriptor::Lp { p, dim } if p.is_one() => Some(vec![l1_generator(&ones(*dim))]),
        NormDescriptor::Schreier { xi, dim } => schreier_generators(xi, *dim).ok(),
        NormDescriptor::Summing { dim } => Some(
            (1..=*dim)
                .map(|m| Generator { parts: vec![(0..m).map(|i| (i, Rational::one())).collect()] })
                .collect(),
        ),
        NormDescriptor::Convexify { base, p } if p.is_one() => polyhedral_generators(base),
        NormDescriptor::DirectSum { outer, inners } => {
            let og = polyhedral_generators(outer)?;
            let ig: Vec<Vec<Generator>> = inners.iter().map(polyhedral_generators).collect::<Option<_>>()?;
            product_generators(&og, &ig, &block_offsets(inners), GENERATOR_CAP)
        }
        _ => None,
    }
}

/// Generators of a polyhedral norm `M ≤ d`: exact for polyhedral
/// descriptors, otherwise coordinate, scaled-ℓ₁, Schreier and branch
/// functionals that each provably stay below the norm.
pub fn minorant_generators(d: &NormDescriptor, bits: u32) -> Vec<Generator> {
    if let Some(g) = polyhedral_generators(d) {
        return g;
    }
    let n = d.dim();
    let unit_norms = |d: &NormDescriptor| -> Vec<Rational> {
        (0..d.dim())
            .map(|i| norm_with_bits(d, FinVector::unit(d.dim(), i).coords(), bits).expect("dims").lo().clone())
            .collect()
    };
    let lp_like = |p: &Exponent, n: usize| -> Vec<Generator> {
        let mut g = coordinate_generators(&vec![Rational::one(); n]);
        let c = lp_l1_floor(p, n, bits);
        g.push(l1_generator(&vec![c; n]));
        g
    };
    match d {
        NormDescriptor::Lp { p, dim } => lp_like(p, *dim),
        NormDescriptor::XXi2 { xi, dim } => {
            // Single admissible sets and singleton partitions are both admissible.
            let mut g = schreier_generators(xi, *dim).unwrap_or_default();
            g.extend(lp_like(&Exponent::two(), *dim));
            g
        }
        NormDescriptor::Zpq { p, q, nodes } => {
            let mut g = lp_like(&Exponent::Finite(q.clone()), n);
            let pe = Exponent::Finite(p.clone());
            for (i, s) in nodes.iter().enumerate() {
                let is_leaf = nodes.get(i + 1).is_none_or(|t| !t.starts_with(s));
                if !is_leaf {
                    continue;
                }
                let path: Vec<usize> = (0..=s.len())
                    .map(|k| nodes.binary_search(&s[..k].to_vec()).expect("downward closed"))
                    .collect();
                let c = lp_l1_floor(&pe, path.len(), bits);
                g.push(Generator { parts: path.into_iter().map(|j| vec![(j, c.clone())]).collect() });
            }
            g
        }
        NormDescriptor::DirectSum { outer, inners } => {
            let og = minorant_generators(outer, bits);
            let ig: Vec<Vec<Generator>> = inners.iter().map(|i| minorant_generators(i, bits)).collect();
            let offs = block_offsets(inners);
            match product_generators(&og, &ig, &offs, GENERATOR_CAP / 10) {
                Some(g) => g,
                None => {
                    let coords: Vec<Generator> = og.iter().filter(|g| g.parts.len() == 1).cloned().collect();
                    product_generators(&coords, &ig, &offs, GENERATOR_CAP)
                        .unwrap_or_else(|| coordinate_generators(&unit_norms(d)))
                }
            }
        }
        _ => {
            // Lattice norms: |x_i| ‖e_i‖ ≤ ‖x‖, and hence min_i ‖e_i‖ ‖x‖₁ / n ≤ ‖x‖.
            let u = unit_norms(d);
            let mut g = coordinate_generators(&u);
            let m = u.iter().min().cloned().unwrap_or_else(Rational::zero);
            if m.is_positive() {
                g.push(l1_generator(&vec![m / int(n as i64); n]));
            }
            g
        }
    }
}

// ---------------------------------------------------------------------------
// Operators

#[derive(Debug, Error)]
#[error("matrix parse error: {0}")]
pub struct MatrixParseError(pub String);

/// A rational matrix `rows × cols` acting on column vectors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OperatorMatrix {
    pub entries: Vec<Vec<Rational>>,
    pub domain: NormDescriptor,
    pub codomain: NormDescriptor,
}

impl OperatorMatrix {
    pub fn new(entries: Vec<Vec<Rational>>, domain: NormDescriptor, codomain: NormDescriptor) -> Result<Self, SpaceError> {
        if entries.len() != codomain.dim() {
            return Err(SpaceError::DimensionMismatch { expected: codomain.dim(), got: entries.len() });
        }
        for r in &entries {
            if r.len() != domain.dim() {
                return Err(SpaceError::DimensionMismatch { expected: domain.dim(), got: r.len() });
            }
        }
        Ok(OperatorMatrix { entries, domain, codomain })
    }

    pub fn identity(d: NormDescriptor) -> Self {
        let n = d.dim();
        let entries = (0..n)
            .map(|i| (0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }).collect())
            .collect();
        OperatorMatrix { entries, domain: d.clone(), codomain: d }
    }

    pub fn zero(domain: NormDescriptor, codomain: NormDescriptor) -> Self {
        let entries = vec![vec![Rational::zero(); domain.dim()]; codomain.dim()];
        OperatorMatrix { entries, domain, codomain }
    }

    pub fn diagonal(d: NormDescriptor, diag: &[Rational]) -> Result<Self, SpaceError> {
        check_dim(&d, diag.len())?;
        let n = diag.len();
        let entries = (0..n)
            .map(|i| (0..n).map(|j| if i == j { diag[i].clone() } else { Rational::zero() }).collect())
            .collect();
        Ok(OperatorMatrix { entries, domain: d.clone(), codomain: d })
    }

    pub fn rows(&self) -> usize {
        self.entries.len()
    }

    pub fn cols(&self) -> usize {
        self.domain.dim()
    }

    pub fn apply(&self, v: &FinVector) -> Result<FinVector, SpaceError> {
        check_dim(&self.domain, v.len())?;
        Ok(FinVector(
            self.entries
                .iter()
                .map(|r| r.iter().zip(&v.0).fold(Rational::zero(), |acc, (a, b)| acc + a * b))
                .collect(),
        ))
    }

    pub fn column(&self, j: usize) -> FinVector {
        FinVector(self.entries.iter().map(|r| r[j].clone()).collect())
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &OperatorMatrix) -> Result<OperatorMatrix, SpaceError> {
        check_dim(&self.domain, other.rows())?;
        let entries = self
            .entries
            .iter()
            .map(|r| {
                (0..other.cols())
                    .map(|j| r.iter().enumerate().fold(Rational::zero(), |acc, (k, a)| acc + a * &other.entries[k][j]))
                    .collect()
            })
            .collect();
        Ok(OperatorMatrix { entries, domain: other.domain.clone(), codomain: self.codomain.clone() })
    }

    pub fn sub(&self, other: &OperatorMatrix) -> OperatorMatrix {
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x - y).collect())
            .collect();
        OperatorMatrix { entries, domain: self.domain.clone(), codomain: self.codomain.clone() }
    }

    /// Parses `[[1,0],[0,1/2]]` (rows).
    pub fn parse_entries(s: &str) -> Result<Vec<Vec<Rational>>, MatrixParseError> {
        let t = s.trim();
        let inner = t
            .strip_prefix('[')
            .and_then(|r| r.strip_suffix(']'))
            .ok_or_else(|| MatrixParseError("expected `[[..],..]`".into()))?;
        split_top(inner, ',')
            .into_iter()
            .filter(|r| !r.is_empty())
            .map(|r| {
                r.parse::<FinVector>().map(|v| v.0).map_err(|e| MatrixParseError(e.to_string()))
            })
            .collect()
    }
}

/// A matrix with certified interval entries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntervalMatrix {
    pub entries: Vec<Vec<Real>>,
    pub domain: NormDescriptor,
    pub codomain: NormDescriptor,
}

impl IntervalMatrix {
    /// The exact matrix, when every entry is exact.
    pub fn to_exact(&self) -> Option<OperatorMatrix> {
        let entries = self
            .entries
            .iter()
            .map(|r| r.iter().map(|x| x.as_exact().cloned()).collect::<Option<Vec<_>>>())
            .collect::<Option<Vec<_>>>()?;
        Some(OperatorMatrix { entries, domain: self.domain.clone(), codomain: self.codomain.clone() })
    }

    pub fn max_width(&self) -> Rational {
        self.entries.iter().flatten().map(Real::width).max().unwrap_or_else(Rational::zero)
    }
}

/// The operator `e_i ↦ Σ_j |a_{ji}|^{1/t} f_j` between the `t`-convexified
/// spaces; the columns of `a` must have pairwise disjoint supports.
pub fn convexify_operator(a: &OperatorMatrix, t: &Rational, bits: u32) -> Result<IntervalMatrix, SpaceError> {
    if *t < Rational::one() {
        return Err(SpaceError::InvalidDescriptor("convexification exponent must be >= 1".into()));
    }
    let cols = a.cols();
    let support = |j: usize| -> Vec<usize> { (0..a.rows()).filter(|&i| !a.entries[i][j].is_zero()).collect() };
    let supports: Vec<Vec<usize>> = (0..cols).map(support).collect();
    for i in 0..cols {
        for j in i + 1..cols {
            if supports[i].iter().any(|r| supports[j].contains(r)) {
                return Err(SpaceError::OverlappingSupports(i, j));
            }
        }
    }
    let entries = a
        .entries
        .iter()
        .map(|r| r.iter().map(|x| Real::exact(x.abs()).powr(&t.recip(), bits)).collect())
        .collect();
    Ok(IntervalMatrix {
        entries,
        domain: NormDescriptor::convexify(a.domain.clone(), t.clone())?,
        codomain: NormDescriptor::convexify(a.codomain.clone(), t.clone())?,
    })
}

/// The truncated operator `S^T`: formal identity `ℓ₁(nodes) → Z_{1,2}(nodes)`
/// followed by the basis projection onto `selected`.
pub fn tree_operator(nodes: &[Vec<u32>], selected: &[Vec<u32>]) -> Result<OperatorMatrix, SpaceError> {
    let mut nodes = nodes.to_vec();
    validate_nodes(&mut nodes)?;
    for s in selected {
        if nodes.binary_search(s).is_err() {
            return Err(SpaceError::SelectionNotClosed);
        }
        if !s.is_empty() && !selected.contains(&s[..s.len() - 1].to_vec()) {
            return Err(SpaceError::SelectionNotClosed);
        }
    }
    let n = nodes.len();
    let diag: Vec<Rational> =
        nodes.iter().map(|s| if selected.contains(s) { Rational::one() } else { Rational::zero() }).collect();
    let entries = (0..n)
        .map(|i| (0..n).map(|j| if i == j { diag[i].clone() } else { Rational::zero() }).collect())
        .collect();
    Ok(OperatorMatrix {
        entries,
        domain: NormDescriptor::lp(Exponent::one(), n)?,
        codomain: NormDescriptor::zpq(int(1), int(2), nodes)?,
    })
}

/// Finite truncation of the spaces `W_ξ` (and the ℓ₁ companion `V_ξ` of the
/// same dimension): every infinite direct sum keeps its first `summands`
/// terms, limit ordinals use their fundamental sequence.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WSpace {
    pub w: NormDescriptor,
    pub v: NormDescriptor,
}

pub fn w_space_approx(xi: &Ordinal, summands: usize, dim_budget: usize) -> Result<WSpace, SpaceError> {
    if summands == 0 {
        return Err(SpaceError::InvalidDescriptor("need at least one summand".into()));
    }
    let w = w_descriptor(xi, summands, dim_budget)?;
    let v = NormDescriptor::lp(Exponent::one(), w.dim())?;
    Ok(WSpace { w, v })
}

fn w_descriptor(xi: &Ordinal, summands: usize, budget: usize) -> Result<NormDescriptor, SpaceError> {
    let d = match xi.classify() {
        Kind::Zero => NormDescriptor::lp(Exponent::one(), 1)?,
        Kind::Successor(pred) => {
            let base = w_descriptor(&pred, summands, budget)?;
            // Z_1 = W, Z_{n+1} = W ⊕₁ Z_n.
            let mut zs = vec![base.clone()];
            for _ in 1..summands {
                let prev = zs.last().expect("non-empty").clone();
                if base.dim() + prev.dim() > budget {
                    return Err(SpaceError::DimensionBudget(budget));
                }
                zs.push(NormDescriptor::direct_sum(NormDescriptor::lp(Exponent::one(), 2)?, vec![base.clone(), prev])?);
            }
            NormDescriptor::direct_sum(NormDescriptor::lp(Exponent::two(), summands)?, zs)?
        }
        Kind::Limit => {
            let parts = (1..=summands as u64)
                .map(|n| w_descriptor(&xi.fundamental(n)?, summands, budget))
                .collect::<Result<Vec<_>, _>>()?;
            NormDescriptor::direct_sum(NormDescriptor::lp(Exponent::two(), summands)?, parts)?
        }
    };
    if d.dim() > budget {
        return Err(SpaceError::DimensionBudget(budget));
    }
    Ok(d)
}

/// A rational functional `f` with `|f·y| ≤ ‖y‖` for all `y`, chosen so that
/// `f·x` is close to `‖x‖`.
pub fn norming_functional(d: &NormDescriptor, x: &[Rational], bits: u32) -> Result<Vec<Rational>, SpaceError> {
    check_dim(d, x.len())?;
    let gens = minorant_generators(d, bits);
    let mut best: Option<(Rational, &Generator)> = None;
    for g in &gens {
        let v = g.value(x);
        if best.as_ref().is_none_or(|(b, _)| v > *b) {
            best = Some((v, g));
        }
    }
    let mut f = vec![Rational::zero(); x.len()];
    if let Some((_, g)) = best {
        for part in &g.parts {
            let s = part.iter().fold(Rational::zero(), |acc, (i, w)| acc + w * &x[*i]);
            let sign = if s.is_negative() { -Rational::one() } else { Rational::one() };
            for (i, w) in part {
                f[*i] += w * &sign;
            }
        }
    }
    Ok(f)
}

/// Rational approximation to a float, for seeding exact checks.
pub fn rationalize(v: &[f64]) -> Vec<Rational> {
    v.iter().map(|&x| approx_f64(x)).collect()
}
