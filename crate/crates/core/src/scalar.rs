//! Exact rationals extended by a single `+inf` element.
//!
//! Measures of cylinder rectangles in the double boundary can be infinite,
//! so the scalar type carries `+inf` with the conventions `inf + x = inf`,
//! `inf * x = inf` for `x > 0` and `0 * inf = 0`. Subtracting or negating
//! `inf` is a logic error and panics.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ExactScalar {
    Finite(BigRational),
    Infinite,
}

/// `base^exp` as an exact rational; negative exponents give reciprocals.
pub fn rational_pow(base: u64, exp: i64) -> BigRational {
    let b = BigInt::from(base);
    let p = num_traits::pow(b, exp.unsigned_abs() as usize);
    if exp >= 0 {
        BigRational::from_integer(p)
    } else {
        BigRational::new(BigInt::one(), p)
    }
}

pub fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

impl ExactScalar {
    pub fn zero() -> Self {
        ExactScalar::Finite(BigRational::zero())
    }

    pub fn one() -> Self {
        ExactScalar::Finite(BigRational::one())
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        ExactScalar::Finite(ratio(n, d))
    }

    pub fn integer(n: i64) -> Self {
        ExactScalar::Finite(BigRational::from_integer(BigInt::from(n)))
    }

    /// `q^k` for any integer `k`.
    pub fn power(q: u64, k: i64) -> Self {
        ExactScalar::Finite(rational_pow(q, k))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, ExactScalar::Infinite)
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, ExactScalar::Finite(r) if r.is_zero())
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            ExactScalar::Finite(r) => Some(r),
            ExactScalar::Infinite => None,
        }
    }

    pub fn into_rational(self) -> Option<BigRational> {
        match self {
            ExactScalar::Finite(r) => Some(r),
            ExactScalar::Infinite => None,
        }
    }

    pub fn abs(&self) -> Self {
        match self {
            ExactScalar::Finite(r) => ExactScalar::Finite(r.abs()),
            ExactScalar::Infinite => ExactScalar::Infinite,
        }
    }

    pub fn powi(&self, exp: u32) -> Self {
        match self {
            ExactScalar::Finite(r) => ExactScalar::Finite(num_traits::pow(r.clone(), exp as usize)),
            ExactScalar::Infinite if exp == 0 => ExactScalar::one(),
            ExactScalar::Infinite => ExactScalar::Infinite,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            ExactScalar::Finite(r) => r.to_f64().unwrap_or(f64::NAN),
            ExactScalar::Infinite => f64::INFINITY,
        }
    }
}

impl Default for ExactScalar {
    fn default() -> Self {
        ExactScalar::zero()
    }
}

impl From<BigRational> for ExactScalar {
    fn from(r: BigRational) -> Self {
        ExactScalar::Finite(r)
    }
}

impl From<i64> for ExactScalar {
    fn from(n: i64) -> Self {
        ExactScalar::integer(n)
    }
}

impl fmt::Display for ExactScalar {
    /// Always `numerator/denominator` (denominator `1` included), or `inf`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExactScalar::Finite(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            ExactScalar::Infinite => f.write_str("inf"),
        }
    }
}

pub(crate) fn parse_rational(s: &str) -> Result<BigRational, Error> {
    let bad = |reason: &str| Error::Parse {
        what: "rational",
        input: s.to_string(),
        reason: reason.to_string(),
    };
    let t = s.trim();
    let (n, d) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (t, "1"),
    };
    let n: BigInt = n.parse().map_err(|_| bad("bad numerator"))?;
    let d: BigInt = d.parse().map_err(|_| bad("bad denominator"))?;
    if d.is_zero() {
        return Err(bad("zero denominator"));
    }
    Ok(BigRational::new(n, d))
}

impl FromStr for ExactScalar {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.trim() == "inf" {
            return Ok(ExactScalar::Infinite);
        }
        parse_rational(s).map(ExactScalar::Finite)
    }
}

impl Serialize for ExactScalar {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ExactScalar {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl PartialOrd for ExactScalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExactScalar {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (ExactScalar::Finite(a), ExactScalar::Finite(b)) => a.cmp(b),
            (ExactScalar::Finite(_), ExactScalar::Infinite) => Ordering::Less,
            (ExactScalar::Infinite, ExactScalar::Finite(_)) => Ordering::Greater,
            (ExactScalar::Infinite, ExactScalar::Infinite) => Ordering::Equal,
        }
    }
}

impl Add<&ExactScalar> for &ExactScalar {
    type Output = ExactScalar;

    fn add(self, rhs: &ExactScalar) -> ExactScalar {
        match (self, rhs) {
            (ExactScalar::Finite(a), ExactScalar::Finite(b)) => ExactScalar::Finite(a + b),
            _ => ExactScalar::Infinite,
        }
    }
}

impl Add for ExactScalar {
    type Output = ExactScalar;

    fn add(self, rhs: ExactScalar) -> ExactScalar {
        match (self, rhs) {
            (ExactScalar::Finite(a), ExactScalar::Finite(b)) => ExactScalar::Finite(a + b),
            _ => ExactScalar::Infinite,
        }
    }
}

impl AddAssign<&ExactScalar> for ExactScalar {
    fn add_assign(&mut self, rhs: &ExactScalar) {
        match (&mut *self, rhs) {
            (ExactScalar::Finite(a), ExactScalar::Finite(b)) => *a += b,
            _ => *self = ExactScalar::Infinite,
        }
    }
}

impl AddAssign for ExactScalar {
    fn add_assign(&mut self, rhs: ExactScalar) {
        *self += &rhs;
    }
}

impl Mul<&ExactScalar> for &ExactScalar {
    type Output = ExactScalar;

    fn mul(self, rhs: &ExactScalar) -> ExactScalar {
        match (self, rhs) {
            (ExactScalar::Finite(a), ExactScalar::Finite(b)) => ExactScalar::Finite(a * b),
            (ExactScalar::Finite(a), ExactScalar::Infinite) | (ExactScalar::Infinite, ExactScalar::Finite(a)) => {
                if a.is_zero() {
                    ExactScalar::zero()
                } else if a.is_positive() {
                    ExactScalar::Infinite
                } else {
                    panic!("negative value times +inf is undefined")
                }
            }
            (ExactScalar::Infinite, ExactScalar::Infinite) => ExactScalar::Infinite,
        }
    }
}

impl Mul for ExactScalar {
    type Output = ExactScalar;

    fn mul(self, rhs: ExactScalar) -> ExactScalar {
        &self * &rhs
    }
}

impl Sub<&ExactScalar> for &ExactScalar {
    type Output = ExactScalar;

    fn sub(self, rhs: &ExactScalar) -> ExactScalar {
        match (self, rhs) {
            (ExactScalar::Finite(a), ExactScalar::Finite(b)) => ExactScalar::Finite(a - b),
            _ => panic!("subtraction involving +inf is undefined"),
        }
    }
}

impl Sub for ExactScalar {
    type Output = ExactScalar;

    fn sub(self, rhs: ExactScalar) -> ExactScalar {
        &self - &rhs
    }
}

impl Div<&ExactScalar> for &ExactScalar {
    type Output = ExactScalar;

    /// Finite division only; dividing by zero or by `inf` panics.
    fn div(self, rhs: &ExactScalar) -> ExactScalar {
        match (self, rhs) {
            (ExactScalar::Finite(a), ExactScalar::Finite(b)) => {
                assert!(!b.is_zero(), "division by zero");
                ExactScalar::Finite(a / b)
            }
            (ExactScalar::Infinite, ExactScalar::Finite(b)) if b.is_positive() => ExactScalar::Infinite,
            _ => panic!("division involving +inf is undefined"),
        }
    }
}

impl Neg for ExactScalar {
    type Output = ExactScalar;

    fn neg(self) -> ExactScalar {
        match self {
            ExactScalar::Finite(a) => ExactScalar::Finite(-a),
            ExactScalar::Infinite => panic!("negation of +inf is undefined"),
        }
    }
}

impl Sum for ExactScalar {
    fn sum<I: Iterator<Item = ExactScalar>>(iter: I) -> Self {
        let mut acc = ExactScalar::zero();
        for x in iter {
            acc += x;
        }
        acc
    }
}

impl<'a> Sum<&'a ExactScalar> for ExactScalar {
    fn sum<I: Iterator<Item = &'a ExactScalar>>(iter: I) -> Self {
        let mut acc = ExactScalar::zero();
        for x in iter {
            acc += x;
        }
        acc
    }
}
