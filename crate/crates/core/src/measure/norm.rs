//! `L^p(nu)` norms of the Busemann cocycle `c_g(xi, omega) = (g, xi) - (g, omega)`.
//!
//! On `{(g, xi) = i} x {(g, omega) = j}` with `i != j` the cocycle equals
//! `i - j` and `(xi, omega) = min(i, j)`, so
//! `||c_g||_p^p = sum_{i != j} |i - j|^p q^{2 min(i,j)} mu_i mu_j`
//! with `mu_i` the level measures. Grouping by `k = |i - j|` gives
//! `2 sum_k k^p q^{-k} s_k` where `s_k = sum_i c_i c_{i+k}` and
//! `mu_i = c_i q^{-i}`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Pow, Zero};

use crate::error::{Error, Result};
use crate::group::{Rank, Word};
use crate::scalar::{rational_pow, ExactScalar};

use super::{endpoint_weight, gromov_level_measure, interior_weight};

fn big(n: u64) -> BigInt {
    BigInt::from(n)
}

fn kp(k: usize, p: u32) -> BigInt {
    Pow::pow(big(k as u64), p)
}

/// `sum_k t_k q^{L-k}` for `k = 1..=L`, evaluated by Horner's rule.
fn horner(q: u64, len: usize, mut term: impl FnMut(usize) -> BigInt) -> BigInt {
    let qb = big(q);
    let mut acc = BigInt::zero();
    for k in 1..=len {
        acc *= &qb;
        acc += term(k);
    }
    acc
}

/// Exact `||c_g||_{L^p(nu)}^p` for integer `p >= 1`, in `O(|g|)` big-integer
/// steps.
pub fn cocycle_lp_norm_p(rank: Rank, g: &Word, p: u32) -> Result<ExactScalar> {
    if p == 0 {
        return Err(Error::OutOfRange("p must be >= 1".into()));
    }
    let len = g.len();
    if len == 0 {
        return Ok(ExactScalar::zero());
    }
    let q = rank.q();
    // scaled by (q+1)^2: e -> q, m -> q-1
    let (e, m) = (big(q), big(q - 1));
    let interior = big(2) * &e * &m;
    let m2 = &m * &m;
    let e2 = &e * &e;
    let num = horner(q, len, |k| {
        let s = if k == len {
            e2.clone()
        } else {
            &interior + &m2 * big((len - k - 1) as u64)
        };
        kp(k, p) * s
    });
    let den = Pow::pow(big(q), len as u32) * big((q + 1) * (q + 1));
    Ok(ExactScalar::Finite(BigRational::new(big(2) * num, den)))
}

/// The defining double sum over level pairs, `O(|g|^2)`. Kept as an oracle.
pub fn cocycle_lp_norm_p_naive(rank: Rank, g: &Word, p: u32) -> Result<ExactScalar> {
    if p == 0 {
        return Err(Error::OutOfRange("p must be >= 1".into()));
    }
    if g.is_identity() {
        return Ok(ExactScalar::zero());
    }
    let levels: Vec<ExactScalar> = (0..=g.len())
        .map(|i| gromov_level_measure(rank, g, i))
        .collect::<Result<_>>()?;
    let mut total = ExactScalar::zero();
    for (i, mi) in levels.iter().enumerate() {
        for (j, mj) in levels.iter().enumerate() {
            if i == j {
                continue;
            }
            let d = i.abs_diff(j) as i64;
            let w = ExactScalar::integer(d).powi(p);
            let weight = ExactScalar::power(rank.q(), 2 * i.min(j) as i64);
            total += &(&(&w * &weight) * &(mi * mj));
        }
    }
    Ok(total)
}

/// Floating-point `||c_g||_p^p` for real `p > 0`, depending only on `|g|`.
pub fn cocycle_lp_norm_p_approx(q: u64, len: usize, p: f64) -> f64 {
    if len == 0 {
        return 0.0;
    }
    let qf = q as f64;
    let e = qf / (qf + 1.0);
    let m = (qf - 1.0) / (qf + 1.0);
    let mut total = 0.0;
    let mut qk = 1.0;
    for k in 1..=len {
        qk /= qf;
        if qk == 0.0 {
            break;
        }
        let s = if k == len {
            e * e
        } else {
            2.0 * e * m + (len - k - 1) as f64 * m * m
        };
        total += (k as f64).powf(p) * qk * s;
    }
    2.0 * total
}

/// `S_N = sum_{0 <= i, j <= N} |i - j|^p q^{-|i - j|}
///      = sum_{k=1}^{N} 2 (N + 1 - k) k^p q^{-k}`.
pub fn s_sum(n: usize, p: u32, q: u64) -> ExactScalar {
    if n == 0 {
        return ExactScalar::zero();
    }
    let num = horner(q, n, |k| big(2 * (n + 1 - k) as u64) * kp(k, p));
    ExactScalar::Finite(BigRational::new(num, Pow::pow(big(q), n as u32)))
}

/// Direct enumeration of the `(N+1)^2` terms of `S_N`.
pub fn s_sum_naive(n: usize, p: u32, q: u64) -> ExactScalar {
    let mut total = ExactScalar::zero();
    for i in 0..=n {
        for j in 0..=n {
            let d = i.abs_diff(j) as i64;
            if d > 0 {
                total += &(&ExactScalar::integer(d).powi(p) * &ExactScalar::power(q, -d));
            }
        }
    }
    total
}

pub fn s_sum_approx(n: usize, p: f64, q: u64) -> f64 {
    let qf = q as f64;
    let mut total = 0.0;
    let mut qk = 1.0;
    for k in 1..=n {
        qk /= qf;
        if qk == 0.0 {
            break;
        }
        total += 2.0 * (n + 1 - k) as f64 * (k as f64).powf(p) * qk;
    }
    total
}

fn eulerian_row(p: u32) -> Vec<BigInt> {
    // A(n, k) = (k+1) A(n-1, k) + (n-k) A(n-1, k-1), A(0, 0) = 1
    let mut row = vec![BigInt::one()];
    for n in 1..=p as usize {
        let mut next = vec![BigInt::zero(); n];
        for (k, slot) in next.iter_mut().enumerate() {
            if k < row.len() {
                *slot += big(k as u64 + 1) * &row[k];
            }
            if k >= 1 {
                *slot += big((n - k) as u64) * &row[k - 1];
            }
        }
        row = next;
    }
    row
}

/// `T = sum_{i >= 1} i^p q^{-i}` in closed form: with `x = 1/q` it equals
/// `x A_p(x) / (1 - x)^{p+1}`, `A_p` the Eulerian polynomial.
pub fn power_series_sum(p: u32, q: u64) -> ExactScalar {
    let x = rational_pow(q, -1);
    let one = BigRational::one();
    if p == 0 {
        return ExactScalar::Finite(&x / (&one - &x));
    }
    let mut poly = BigRational::zero();
    let mut xk = BigRational::one();
    for a in eulerian_row(p) {
        poly += BigRational::from_integer(a) * &xk;
        xk *= &x;
    }
    let denom = Pow::pow(&one - &x, p + 1);
    ExactScalar::Finite(&x * poly / denom)
}

/// Bounds satisfied by `||c_g||_p^p` for `|g| = L`:
/// `m^2 S_L <= norm <= e^2 S_L` with `e = q/(q+1)`, `m = (q-1)/(q+1)`, and
/// the per-length rates `2 q^{-1} m^2 <= norm / L <= 2 e^2 T`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormBrackets {
    pub s: ExactScalar,
    pub lower: ExactScalar,
    pub upper: ExactScalar,
    pub rate_lower: ExactScalar,
    pub rate_upper: ExactScalar,
}

pub fn norm_brackets(rank: Rank, len: usize, p: u32) -> NormBrackets {
    let q = rank.q();
    let e = ExactScalar::Finite(endpoint_weight(rank));
    let m = ExactScalar::Finite(interior_weight(rank));
    let e2 = &e * &e;
    let m2 = &m * &m;
    let s = s_sum(len, p, q);
    let two = ExactScalar::integer(2);
    NormBrackets {
        lower: &m2 * &s,
        upper: &e2 * &s,
        s,
        rate_lower: &(&two * &ExactScalar::power(q, -1)) * &m2,
        rate_upper: &(&two * &e2) * &power_series_sum(p, q),
    }
}
