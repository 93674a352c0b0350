use std::fmt::Debug;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Num, One, Signed, ToPrimitive, Zero};
use serde_json::Value;

/// Entry type of a distance matrix: exact rationals or `f64`.
pub trait MetricScalar: Clone + PartialOrd + Debug + Num + Signed {
    const EXACT: bool;

    fn to_f64(&self) -> f64;

    fn from_u128(v: u128) -> Self;

    fn from_ratio(n: i64, d: i64) -> Self;

    /// Absolute slack allowed when validating the metric axioms.
    fn axiom_slack() -> Self;

    /// The matrix rescaled to nonnegative integers below `2^32`, when that is
    /// possible without loss. Quotients of products of distances, which is
    /// all that cross-ratios and derivatives use, are unchanged by the
    /// common factor.
    fn integer_matrix(_m: &[Vec<Self>]) -> Option<Vec<Vec<u64>>> {
        None
    }

    /// JSON form: `"n/d"` strings for exact values, numbers otherwise.
    fn to_json(&self) -> Value;

    /// Whether `self <= exp(r)` for `r >= 0`.
    fn le_exp(&self, r: &Self) -> bool;
}

impl MetricScalar for BigRational {
    const EXACT: bool = true;

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn from_u128(v: u128) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }

    fn from_ratio(n: i64, d: i64) -> Self {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn axiom_slack() -> Self {
        BigRational::zero()
    }

    fn integer_matrix(m: &[Vec<Self>]) -> Option<Vec<Vec<u64>>> {
        let limit = BigInt::from(u32::MAX);
        let mut lcm = BigInt::one();
        for v in m.iter().flatten() {
            lcm = lcm.lcm(v.denom());
            if lcm > limit {
                return None;
            }
        }
        m.iter()
            .map(|row| {
                row.iter()
                    .map(|v| {
                        let scaled = v.numer() * (&lcm / v.denom());
                        if scaled.is_negative() || scaled > limit {
                            None
                        } else {
                            scaled.to_u64()
                        }
                    })
                    .collect()
            })
            .collect()
    }

    fn to_json(&self) -> Value {
        Value::String(format!("{}/{}", self.numer(), self.denom()))
    }

    fn le_exp(&self, r: &Self) -> bool {
        if *self <= BigRational::one() {
            return true;
        }
        // partial sums of the exponential series are lower bounds; adding
        // the geometric bound on the tail gives upper bounds once k + 2 > r
        let mut sum = BigRational::one();
        let mut term = BigRational::one();
        for k in 1..2000u32 {
            term = term * r / BigRational::from_integer(BigInt::from(k));
            sum += &term;
            if *self <= sum {
                return true;
            }
            let next = BigRational::from_integer(BigInt::from(k + 2));
            if next > *r {
                let tail = &term * r / BigRational::from_integer(BigInt::from(k + 1)) * &next / (&next - r);
                if *self > &sum + tail {
                    return false;
                }
            }
        }
        false
    }
}

impl MetricScalar for f64 {
    const EXACT: bool = false;

    fn to_f64(&self) -> f64 {
        *self
    }

    fn from_u128(v: u128) -> Self {
        v as f64
    }

    fn from_ratio(n: i64, d: i64) -> Self {
        n as f64 / d as f64
    }

    fn axiom_slack() -> Self {
        1e-12
    }

    fn to_json(&self) -> Value {
        serde_json::Number::from_f64(*self)
            .map(Value::Number)
            .unwrap_or(Value::Null)
    }

    fn le_exp(&self, r: &Self) -> bool {
        *self <= r.exp() * (1.0 + 1e-12)
    }
}
