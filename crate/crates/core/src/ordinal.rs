//! Ordinals below ε₀ in Cantor normal form.
//!
//! An ordinal is a finite sum `ω^e₁·c₁ + … + ω^eₖ·cₖ` with strictly
//! decreasing exponents (themselves ordinals) and positive integer
//! coefficients. The representation is canonical, so derived equality and
//! hashing are ordinal equality.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Exponent towers deeper than this are rejected.
pub const MAX_TOWER_DEPTH: usize = 32;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OrdinalError {
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("exponent tower depth {0} exceeds the cap of {MAX_TOWER_DEPTH}")]
    TooDeep(usize),
    #[error("{0} is not a limit ordinal")]
    NotLimit(Ordinal),
    #[error("fundamental sequence index must be positive")]
    ZeroIndex,
    #[error("terms are not in Cantor normal form")]
    NotCanonical,
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Term {
    pub exponent: Ordinal,
    pub coefficient: u64,
}

#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Ordinal {
    terms: Vec<Term>,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Kind {
    Zero,
    Successor(Ordinal),
    Limit,
}

impl Ordinal {
    pub fn zero() -> Self {
        Ordinal { terms: Vec::new() }
    }

    pub fn one() -> Self {
        Ordinal::from(1)
    }

    pub fn omega() -> Self {
        Ordinal::omega_pow(Ordinal::one())
    }

    /// `ω^e`.
    pub fn omega_pow(e: Ordinal) -> Self {
        Ordinal { terms: vec![Term { exponent: e, coefficient: 1 }] }
    }

    /// Build from `(exponent, coefficient)` pairs, which must already be in
    /// canonical order with positive coefficients.
    pub fn from_terms(terms: Vec<(Ordinal, u64)>) -> Result<Self, OrdinalError> {
        for w in terms.windows(2) {
            if w[0].0 <= w[1].0 {
                return Err(OrdinalError::NotCanonical);
            }
        }
        if terms.iter().any(|(_, c)| *c == 0) {
            return Err(OrdinalError::NotCanonical);
        }
        let o = Ordinal {
            terms: terms
                .into_iter()
                .map(|(exponent, coefficient)| Term { exponent, coefficient })
                .collect(),
        };
        o.check_depth()?;
        Ok(o)
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The value as a natural number, when finite.
    pub fn as_finite(&self) -> Option<u64> {
        match self.terms.as_slice() {
            [] => Some(0),
            [t] if t.exponent.is_zero() => Some(t.coefficient),
            _ => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.as_finite().is_some()
    }

    pub fn leading_exponent(&self) -> Option<&Ordinal> {
        self.terms.first().map(|t| &t.exponent)
    }

    /// Height of the exponent tower: 0 for 0, 1 for positive naturals.
    pub fn depth(&self) -> usize {
        self.terms.iter().map(|t| 1 + t.exponent.depth()).max().unwrap_or(0)
    }

    fn check_depth(&self) -> Result<(), OrdinalError> {
        let d = self.depth();
        if d > MAX_TOWER_DEPTH {
            Err(OrdinalError::TooDeep(d))
        } else {
            Ok(())
        }
    }

    pub fn successor(&self) -> Ordinal {
        self + &Ordinal::one()
    }

    pub fn classify(&self) -> Kind {
        match self.terms.last() {
            None => Kind::Zero,
            Some(t) if t.exponent.is_zero() => {
                let mut pred = self.clone();
                let last = pred.terms.last_mut().expect("non-empty");
                last.coefficient -= 1;
                if last.coefficient == 0 {
                    pred.terms.pop();
                }
                Kind::Successor(pred)
            }
            Some(_) => Kind::Limit,
        }
    }

    pub fn is_limit(&self) -> bool {
        self.classify() == Kind::Limit
    }

    pub fn predecessor(&self) -> Option<Ordinal> {
        match self.classify() {
            Kind::Successor(p) => Some(p),
            _ => None,
        }
    }

    /// The `n`-th element (n ≥ 1) of the fixed fundamental sequence of a
    /// limit ordinal. Every element is a successor ordinal.
    ///
    /// For a last term `ω^(β+1)·c` the element replaces it by
    /// `ω^(β+1)·(c−1) + ω^β·n`; for a limit exponent it recurses into the
    /// exponent. A limit result is bumped by one.
    pub fn fundamental(&self, n: u64) -> Result<Ordinal, OrdinalError> {
        if n == 0 {
            return Err(OrdinalError::ZeroIndex);
        }
        if !self.is_limit() {
            return Err(OrdinalError::NotLimit(self.clone()));
        }
        let mut prefix = self.clone();
        let last = prefix.terms.pop().expect("limit is non-zero");
        if last.coefficient > 1 {
            prefix.terms.push(Term { exponent: last.exponent.clone(), coefficient: last.coefficient - 1 });
        }
        let tail = match last.exponent.classify() {
            Kind::Successor(beta) => Ordinal {
                terms: vec![Term { exponent: beta, coefficient: n }],
            },
            Kind::Limit => Ordinal::omega_pow(last.exponent.fundamental(n)?),
            Kind::Zero => unreachable!("limit ordinals have a positive last exponent"),
        };
        let r = &prefix + &tail;
        Ok(if r.is_limit() { r.successor() } else { r })
    }

    /// True iff `α·β < self` for all `α, β < self`: the ordinals 0, 1 and
    /// `ω^(ω^ζ)`.
    pub fn is_multiplicatively_indecomposable(&self) -> bool {
        match self.as_finite() {
            Some(0) | Some(1) => return true,
            Some(_) => return false,
            None => {}
        }
        match self.terms.as_slice() {
            [t] if t.coefficient == 1 => {
                matches!(t.exponent.terms.as_slice(), [e] if e.coefficient == 1)
            }
            _ => false,
        }
    }

    fn add_ref(&self, other: &Ordinal) -> Ordinal {
        let Some(head) = other.terms.first() else {
            return self.clone();
        };
        let mut terms: Vec<Term> = Vec::with_capacity(self.terms.len() + other.terms.len());
        let mut merged = None;
        for t in &self.terms {
            match t.exponent.cmp(&head.exponent) {
                Ordering::Greater => terms.push(t.clone()),
                Ordering::Equal => merged = Some(t.coefficient),
                Ordering::Less => break,
            }
        }
        let mut rest = other.terms.iter();
        let first = rest.next().expect("non-empty");
        let c = match merged {
            Some(c) => c.checked_add(first.coefficient).expect("ordinal coefficient overflow"),
            None => first.coefficient,
        };
        terms.push(Term { exponent: first.exponent.clone(), coefficient: c });
        terms.extend(rest.cloned());
        Ordinal { terms }
    }

    fn mul_ref(&self, other: &Ordinal) -> Ordinal {
        if self.is_zero() || other.is_zero() {
            return Ordinal::zero();
        }
        let lead = &self.terms[0];
        let mut acc = Ordinal::zero();
        for t in &other.terms {
            let piece = if t.exponent.is_zero() {
                let mut p = self.clone();
                p.terms[0].coefficient =
                    lead.coefficient.checked_mul(t.coefficient).expect("ordinal coefficient overflow");
                p
            } else {
                Ordinal {
                    terms: vec![Term {
                        exponent: &lead.exponent + &t.exponent,
                        coefficient: t.coefficient,
                    }],
                }
            };
            acc = &acc + &piece;
        }
        acc
    }
}

impl From<u64> for Ordinal {
    fn from(n: u64) -> Self {
        if n == 0 {
            Ordinal::zero()
        } else {
            Ordinal { terms: vec![Term { exponent: Ordinal::zero(), coefficient: n }] }
        }
    }
}

impl Ord for Ordinal {
    fn cmp(&self, other: &Self) -> Ordering {
        for (a, b) in self.terms.iter().zip(&other.terms) {
            let c = a.exponent.cmp(&b.exponent).then(a.coefficient.cmp(&b.coefficient));
            if c != Ordering::Equal {
                return c;
            }
        }
        self.terms.len().cmp(&other.terms.len())
    }
}

impl PartialOrd for Ordinal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add for &Ordinal {
    type Output = Ordinal;
    fn add(self, rhs: &Ordinal) -> Ordinal {
        self.add_ref(rhs)
    }
}

impl Add for Ordinal {
    type Output = Ordinal;
    fn add(self, rhs: Ordinal) -> Ordinal {
        self.add_ref(&rhs)
    }
}

impl Mul for &Ordinal {
    type Output = Ordinal;
    fn mul(self, rhs: &Ordinal) -> Ordinal {
        self.mul_ref(rhs)
    }
}

impl Mul for Ordinal {
    type Output = Ordinal;
    fn mul(self, rhs: Ordinal) -> Ordinal {
        self.mul_ref(&rhs)
    }
}

impl fmt::Display for Ordinal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            match t.exponent.as_finite() {
                Some(0) => write!(f, "{}", t.coefficient)?,
                Some(1) => write!(f, "w")?,
                _ => write!(f, "w^({})", t.exponent)?,
            }
            if !t.exponent.is_zero() && t.coefficient > 1 {
                write!(f, "*{}", t.coefficient)?;
            }
        }
        Ok(())
    }
}

impl FromStr for Ordinal {
    type Err = OrdinalError;

    /// Grammar: sums (`+`) of products (`*`) of naturals, `w`, `w^x` and
    /// parenthesised expressions, where `x` is a natural, `w`, or `(expr)`.
    /// Non-canonical input such as `1 + w` is evaluated.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut p = Parser { src: s.as_bytes(), pos: 0 };
        let o = p.expr()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.err("unexpected trailing input"));
        }
        o.check_depth()?;
        Ok(o)
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> OrdinalError {
        OrdinalError::Parse { pos: self.pos, msg: msg.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Ordinal, OrdinalError> {
        let mut acc = self.term()?;
        while self.eat(b'+') {
            let t = self.term()?;
            acc = &acc + &t;
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Ordinal, OrdinalError> {
        let mut acc = self.factor()?;
        while self.eat(b'*') {
            let f = self.factor()?;
            acc = &acc * &f;
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Ordinal, OrdinalError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.err("expected `)`"));
                }
                Ok(e)
            }
            Some(b'w') => {
                self.pos += 1;
                if self.eat(b'^') {
                    let e = self.power()?;
                    if e.depth() >= MAX_TOWER_DEPTH {
                        return Err(OrdinalError::TooDeep(e.depth() + 1));
                    }
                    Ok(Ordinal::omega_pow(e))
                } else {
                    Ok(Ordinal::omega())
                }
            }
            Some(c) if c.is_ascii_digit() => Ok(Ordinal::from(self.natural()?)),
            Some(_) => Err(self.err("expected a natural, `w` or `(`")),
            None => Err(self.err("unexpected end of input")),
        }
    }

    fn power(&mut self) -> Result<Ordinal, OrdinalError> {
        match self.peek() {
            Some(b'(') => self.factor(),
            Some(b'w') => self.factor(),
            Some(c) if c.is_ascii_digit() => Ok(Ordinal::from(self.natural()?)),
            _ => Err(self.err("expected exponent")),
        }
    }

    fn natural(&mut self) -> Result<u64, OrdinalError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .expect("ascii digits")
            .parse()
            .map_err(|_| OrdinalError::Parse { pos: start, msg: "natural out of range".into() })
    }
}

impl Serialize for Ordinal {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Ordinal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn o(s: &str) -> Ordinal {
        s.parse().unwrap()
    }

    #[test]
    fn addition_examples() {
        assert_eq!(&o("1") + &o("w"), o("w"));
        assert_eq!(&o("w^2") + &o("w+1"), o("w^(2) + w + 1"));
        assert_eq!(&o("w*2+3") + &o("w*3"), o("w*5"));
    }

    #[test]
    fn multiplication_examples() {
        assert_eq!(&o("2") * &o("w"), o("w"));
        assert_eq!(&o("w*2") * &o("w"), o("w^2"));
        assert_eq!(&o("w+1") * &o("w+1"), o("w^2 + w + 1"));
    }

    #[test]
    fn omega_powers() {
        assert_eq!(Ordinal::omega_pow(Ordinal::zero()), Ordinal::one());
        assert_eq!(Ordinal::omega_pow(Ordinal::one()), Ordinal::omega());
        let e = o("w+1");
        let p = Ordinal::omega_pow(e.clone());
        assert_eq!(p.terms().len(), 1);
        assert_eq!(p.terms()[0].exponent, e);
        assert_eq!(p.terms()[0].coefficient, 1);
    }

    #[test]
    fn classification() {
        assert_eq!(o("w*2+5").classify(), Kind::Successor(o("w*2+4")));
        assert_eq!(o("w^2").classify(), Kind::Limit);
        assert_eq!(Ordinal::zero().classify(), Kind::Zero);
    }

    #[test]
    fn fundamental_sequences() {
        assert_eq!(o("w").fundamental(3).unwrap(), o("3"));
        assert_eq!(o("w^2").fundamental(2).unwrap(), o("w*2+1"));
        assert_eq!(o("w^w").fundamental(2).unwrap(), o("w^2+1"));
        assert_eq!(o("w*3").fundamental(4).unwrap(), o("w*2+4"));
        assert!(matches!(o("w+1").fundamental(1), Err(OrdinalError::NotLimit(_))));
        assert!(matches!(o("w").fundamental(0), Err(OrdinalError::ZeroIndex)));
    }

    #[test]
    fn indecomposable() {
        assert!(o("w").is_multiplicatively_indecomposable());
        assert!(!o("w^2").is_multiplicatively_indecomposable());
        assert!(o("1").is_multiplicatively_indecomposable());
        assert!(o("0").is_multiplicatively_indecomposable());
        assert!(o("w^w").is_multiplicatively_indecomposable());
        assert!(o("w^(w^2)").is_multiplicatively_indecomposable());
        assert!(!o("w^(w*2)").is_multiplicatively_indecomposable());
        assert!(!o("2").is_multiplicatively_indecomposable());
    }

    #[test]
    fn format_round_trip() {
        for s in ["0", "7", "w", "w*3", "w^(2)*3 + w + 4", "w^(w^(2) + 1) + w^(w)*2 + 5"] {
            let x = o(s);
            assert_eq!(x.to_string(), s);
            assert_eq!(o(&x.to_string()), x);
        }
    }

    #[test]
    fn parse_errors() {
        assert!(matches!("w +".parse::<Ordinal>(), Err(OrdinalError::Parse { .. })));
        assert!(matches!("x".parse::<Ordinal>(), Err(OrdinalError::Parse { .. })));
        assert!(matches!("(w".parse::<Ordinal>(), Err(OrdinalError::Parse { .. })));
        let tower = "w^(".repeat(33) + "1" + &")".repeat(33);
        assert!(matches!(tower.parse::<Ordinal>(), Err(OrdinalError::TooDeep(_))));
        let ok = "w^(".repeat(31) + "1" + &")".repeat(31);
        assert!(ok.parse::<Ordinal>().is_ok());
    }

    #[test]
    fn ordering() {
        assert!(o("w") > o("100"));
        assert!(o("w^2") > o("w*5+3"));
        assert!(o("w+1") > o("w"));
        assert!(o("w^w") > o("w^5*9"));
    }
}
