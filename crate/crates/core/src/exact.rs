//! Exact rationals and certified real enclosures.
//!
//! Every quantity that can be rational is kept rational. Quantities that are
//! not (square roots, `p`-th powers) are carried as closed rational intervals
//! guaranteed to contain the true value.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

pub type Rational = BigRational;

/// Default number of fractional bits used when bracketing irrational roots.
pub const DEFAULT_PRECISION_BITS: u32 = 96;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or_else(|| {
        // numerator/denominator overflow f64 individually
        let n = q.numer().to_f64().unwrap_or(f64::MAX);
        let d = q.denom().to_f64().unwrap_or(f64::MAX);
        n / d
    })
}

/// Exact conversion of a finite float. Panics on NaN or infinity.
pub fn from_f64(x: f64) -> Rational {
    Rational::from_float(x).expect("finite float")
}

/// Rational with small denominator close to `x` (within 2^-40 relative).
pub fn approx_f64(x: f64) -> Rational {
    let scale = 1i64 << 40;
    let n = (x * scale as f64).round();
    Rational::new(BigInt::from(n as i128), BigInt::from(scale))
}

/// Format a rational as `a` or `a/b`.
pub fn fmt_rational(q: &Rational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("invalid rational literal `{0}`")]
pub struct ParseRationalError(pub String);

/// Parse `3`, `-2/3` or a terminating decimal like `0.25`.
pub fn parse_rational(s: &str) -> Result<Rational, ParseRationalError> {
    let t = s.trim();
    let err = || ParseRationalError(s.to_string());
    if let Some((n, d)) = t.split_once('/') {
        let n = BigInt::from_str(n.trim()).map_err(|_| err())?;
        let d = BigInt::from_str(d.trim()).map_err(|_| err())?;
        if d.is_zero() {
            return Err(err());
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((whole, frac)) = t.split_once('.') {
        if frac.is_empty() || !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(err());
        }
        let neg = whole.starts_with('-');
        let whole_digits = whole.trim_start_matches(['-', '+']);
        let digits = format!("{}{}", if whole_digits.is_empty() { "0" } else { whole_digits }, frac);
        let mut n = BigInt::from_str(&digits).map_err(|_| err())?;
        if neg {
            n = -n;
        }
        let d = num_traits::pow(BigInt::from(10), frac.len());
        return Ok(Rational::new(n, d));
    }
    BigInt::from_str(t).map(Rational::from_integer).map_err(|_| err())
}

/// Serde adapter writing rationals as strings.
pub mod serde_rational {
    use super::*;

    pub fn serialize<S: Serializer>(q: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_rational(q))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

pub mod serde_rational_vec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
        let strs: Vec<String> = v.iter().map(fmt_rational).collect();
        strs.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        v.iter()
            .map(|s| parse_rational(s).map_err(serde::de::Error::custom))
            .collect()
    }
}

/// Bracket the non-negative `n`-th root of `x`: returns `(lo, hi)` with
/// `lo^n <= x <= hi^n`; `lo == hi` when the root is rational.
pub fn nth_root_bounds(x: &Rational, n: u32, bits: u32) -> (Rational, Rational) {
    assert!(!x.is_negative(), "root of a negative number");
    assert!(n >= 1);
    if n == 1 || x.is_zero() {
        return (x.clone(), x.clone());
    }
    let rn = x.numer().nth_root(n);
    let rd = x.denom().nth_root(n);
    if num_traits::pow(rn.clone(), n as usize) == *x.numer()
        && num_traits::pow(rd.clone(), n as usize) == *x.denom()
    {
        let r = Rational::new(rn, rd);
        return (r.clone(), r);
    }
    let scale = BigInt::one() << (bits as usize);
    let scaled = x.numer() * num_traits::pow(scale.clone(), n as usize) / x.denom();
    let f = scaled.nth_root(n);
    let lo = Rational::new(f.clone(), scale.clone());
    let hi = Rational::new(f + 1, scale);
    (lo, hi)
}

/// Closed rational interval containing a real number. Degenerate intervals
/// are exact values.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Real {
    lo: Rational,
    hi: Rational,
}

impl Real {
    pub fn exact(q: Rational) -> Self {
        Real { lo: q.clone(), hi: q }
    }

    pub fn zero() -> Self {
        Real::exact(Rational::zero())
    }

    pub fn between(lo: Rational, hi: Rational) -> Self {
        assert!(lo <= hi, "empty interval");
        Real { lo, hi }
    }

    pub fn lo(&self) -> &Rational {
        &self.lo
    }

    pub fn hi(&self) -> &Rational {
        &self.hi
    }

    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    pub fn as_exact(&self) -> Option<&Rational> {
        self.is_exact().then_some(&self.lo)
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn midpoint_f64(&self) -> f64 {
        (to_f64(&self.lo) + to_f64(&self.hi)) / 2.0
    }

    pub fn contains(&self, q: &Rational) -> bool {
        &self.lo <= q && q <= &self.hi
    }

    pub fn add(&self, other: &Real) -> Real {
        Real { lo: &self.lo + &other.lo, hi: &self.hi + &other.hi }
    }

    pub fn neg(&self) -> Real {
        Real { lo: -&self.hi, hi: -&self.lo }
    }

    pub fn abs(&self) -> Real {
        if !self.lo.is_negative() {
            self.clone()
        } else if !self.hi.is_positive() {
            self.neg()
        } else {
            Real { lo: Rational::zero(), hi: (-&self.lo).max(self.hi.clone()) }
        }
    }

    /// Multiply by a non-negative rational.
    pub fn scale(&self, c: &Rational) -> Real {
        assert!(!c.is_negative());
        Real { lo: &self.lo * c, hi: &self.hi * c }
    }

    pub fn mul(&self, other: &Real) -> Real {
        assert!(!self.lo.is_negative() && !other.lo.is_negative());
        Real { lo: &self.lo * &other.lo, hi: &self.hi * &other.hi }
    }

    pub fn max(&self, other: &Real) -> Real {
        Real {
            lo: self.lo.clone().max(other.lo.clone()),
            hi: self.hi.clone().max(other.hi.clone()),
        }
    }

    pub fn pow_int(&self, n: u32) -> Real {
        assert!(!self.lo.is_negative());
        Real {
            lo: num_traits::pow(self.lo.clone(), n as usize),
            hi: num_traits::pow(self.hi.clone(), n as usize),
        }
    }

    pub fn root(&self, n: u32, bits: u32) -> Real {
        let (lo, _) = nth_root_bounds(&self.lo, n, bits);
        let (_, hi) = nth_root_bounds(&self.hi, n, bits);
        Real { lo, hi }
    }

    pub fn sqrt(&self, bits: u32) -> Real {
        self.root(2, bits)
    }

    /// `self^p` for a positive rational exponent `p = r/s`, self non-negative.
    pub fn powr(&self, p: &Rational, bits: u32) -> Real {
        assert!(p.is_positive());
        let r = p.numer().to_u32().expect("exponent numerator too large");
        let s = p.denom().to_u32().expect("exponent denominator too large");
        self.pow_int(r).root(s, bits)
    }

    /// Divide two non-negative enclosures; `None` when the divisor may vanish.
    pub fn div(&self, other: &Real) -> Option<Real> {
        if !other.lo.is_positive() {
            return None;
        }
        Some(Real { lo: &self.lo / &other.hi, hi: &self.hi / &other.lo })
    }

    /// `Some(true)` if certainly `<= k`, `Some(false)` if certainly `> k`.
    pub fn le(&self, k: &Rational) -> Option<bool> {
        if &self.hi <= k {
            Some(true)
        } else if &self.lo > k {
            Some(false)
        } else {
            None
        }
    }

    pub fn cmp_rational(&self, k: &Rational) -> Option<Ordering> {
        if &self.hi < k {
            Some(Ordering::Less)
        } else if &self.lo > k {
            Some(Ordering::Greater)
        } else if self.is_exact() {
            Some(Ordering::Equal)
        } else {
            None
        }
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_exact() {
            write!(f, "{}", fmt_rational(&self.lo))
        } else {
            write!(f, "[{:.12}, {:.12}]", to_f64(&self.lo), to_f64(&self.hi))
        }
    }
}

impl Serialize for Real {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Real", 4)?;
        st.serialize_field("lo", &fmt_rational(&self.lo))?;
        st.serialize_field("hi", &fmt_rational(&self.hi))?;
        st.serialize_field("exact", &self.is_exact())?;
        st.serialize_field("approx", &self.midpoint_f64())?;
        st.end()
    }
}

/// An exponent `1 <= p <= ∞`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Exponent {
    Finite(Rational),
    Infinity,
}

impl Exponent {
    pub fn one() -> Self {
        Exponent::Finite(Rational::one())
    }

    pub fn two() -> Self {
        Exponent::Finite(int(2))
    }

    pub fn finite(&self) -> Option<&Rational> {
        match self {
            Exponent::Finite(p) => Some(p),
            Exponent::Infinity => None,
        }
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Exponent::Finite(p) if p.is_one())
    }

    pub fn is_two(&self) -> bool {
        matches!(self, Exponent::Finite(p) if *p == int(2))
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(p) => write!(f, "{}", fmt_rational(p)),
            Exponent::Infinity => write!(f, "inf"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExponentError {
    #[error(transparent)]
    Parse(#[from] ParseRationalError),
    #[error("exponent must be at least 1, got {0}")]
    BelowOne(String),
}

impl FromStr for Exponent {
    type Err = ExponentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        if matches!(t, "inf" | "oo" | "∞" | "infinity") {
            return Ok(Exponent::Infinity);
        }
        let p = parse_rational(t)?;
        if p < Rational::one() {
            return Err(ExponentError::BelowOne(t.to_string()));
        }
        Ok(Exponent::Finite(p))
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A rational `c` with `c <= d^{-(1 - 1/p)}`, i.e. `‖z‖_p >= c ‖z‖_1` on `R^d`.
pub fn lp_l1_floor(p: &Exponent, d: usize, bits: u32) -> Rational {
    let d = Rational::from_integer(BigInt::from(d.max(1)));
    match p {
        Exponent::Infinity => d.recip(),
        Exponent::Finite(p) => {
            // c = d^{-(r-s)/r} with p = r/s
            let r = p.numer().to_u32().unwrap_or(u32::MAX);
            let s = p.denom().to_u32().unwrap_or(1);
            if r > 64 {
                return d.recip();
            }
            let target = Real::exact(d.recip()).pow_int(r - s).root(r, bits);
            target.lo().clone()
        }
    }
}
