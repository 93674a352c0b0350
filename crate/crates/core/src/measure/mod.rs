//! Exact measure calculus on the boundary `Omega` of the Cayley tree and on
//! `Omega x Omega`.
//!
//! `mu` is the uniform probability measure, `mu(Omega_x) = q/(q+1) q^{-|x|}`.
//! The double-boundary measure is `d nu = q^{2 (xi, omega)} d mu d mu`; it is
//! infinite on every rectangle whose sides are nested cylinders and finite
//! (and given by a closed form) otherwise.

mod function;
mod norm;

pub use function::{integrate_nu, BoundaryFunction, PairFunction};
pub use norm::{
    cocycle_lp_norm_p, cocycle_lp_norm_p_approx, cocycle_lp_norm_p_naive, norm_brackets, power_series_sum, s_sum,
    s_sum_approx, s_sum_naive, NormBrackets,
};

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::group::{BoundaryPoint, CylinderSet, Rank, Word};
use crate::scalar::{rational_pow, ExactScalar};

/// `q/(q+1)`: the measure of `{xi : (g, xi) = i}` at the endpoints, and the
/// Ahlfors constant of `mu` for the metric `q^{-(.,.)}`.
pub fn endpoint_weight(rank: Rank) -> BigRational {
    let q = rank.q() as i64;
    BigRational::new(BigInt::from(q), BigInt::from(q + 1))
}

/// `(q-1)/(q+1)`: the same measure at interior levels.
pub fn interior_weight(rank: Rank) -> BigRational {
    let q = rank.q() as i64;
    BigRational::new(BigInt::from(q - 1), BigInt::from(q + 1))
}

/// `mu(Omega_x)`; the identity labels all of `Omega`, of measure 1.
pub fn mu_cylinder(rank: Rank, x: &Word) -> ExactScalar {
    if x.is_identity() {
        ExactScalar::one()
    } else {
        ExactScalar::Finite(endpoint_weight(rank) * rational_pow(rank.q(), -(x.len() as i64)))
    }
}

/// Measure of a cylinder set, by finite additivity over its disjoint cells.
pub fn mu_set(set: &CylinderSet) -> ExactScalar {
    set.cells().map(|x| mu_cylinder(set.rank(), x)).sum()
}

/// `P_g(xi) = q^{-|g| + 2 (g, xi)}`.
pub fn poisson_kernel(rank: Rank, g: &Word, xi: &BoundaryPoint) -> ExactScalar {
    let k = 2 * xi.gromov_product_word(g) as i64 - g.len() as i64;
    ExactScalar::power(rank.q(), k)
}

/// The Poisson kernel on a cylinder deep enough for it to be constant.
pub fn poisson_kernel_on_cylinder(rank: Rank, g: &Word, w: &Word) -> Result<ExactScalar> {
    if w.len() < g.len() {
        return Err(Error::Precondition(format!(
            "P_g is constant only on cylinders of depth >= |g| = {}, got {}",
            g.len(),
            w.len()
        )));
    }
    let k = 2 * g.gromov_product(w) as i64 - g.len() as i64;
    Ok(ExactScalar::power(rank.q(), k))
}

/// Metric derivative of `g` for the visual metric `q^{-(.,.)}`:
/// `|g'|(xi) = q^{2 (g^{-1}, xi) - |g|}`, which is `P_{g^{-1}}(xi)`.
pub fn derivative_on_tree(rank: Rank, g: &Word, xi: &BoundaryPoint) -> ExactScalar {
    poisson_kernel(rank, &g.inverse(), xi)
}

/// `|g'|` on a cylinder of depth at least `|g|`, where it is constant.
pub fn derivative_on_cylinder(rank: Rank, g: &Word, w: &Word) -> Result<ExactScalar> {
    poisson_kernel_on_cylinder(rank, &g.inverse(), w)
}

/// `nu(Omega_x x Omega_y)`: `+inf` if one label is a prefix of the other,
/// otherwise `q^{2 (x, y)} mu(Omega_x) mu(Omega_y)` since the Gromov product
/// is constant on the rectangle.
pub fn nu_of_rectangle(rank: Rank, x: &Word, y: &Word) -> ExactScalar {
    if x.nested_with(y) {
        return ExactScalar::Infinite;
    }
    let weight = ExactScalar::power(rank.q(), 2 * x.gromov_product(y) as i64);
    &(&weight * &mu_cylinder(rank, x)) * &mu_cylinder(rank, y)
}

/// `nu(K_n)` where `K_n` is the set of pairs with Gromov product exactly `n`.
pub fn nu_levelset(rank: Rank, n: usize) -> ExactScalar {
    if n == 0 {
        ExactScalar::Finite(endpoint_weight(rank))
    } else {
        ExactScalar::Finite(interior_weight(rank) * rational_pow(rank.q(), n as i64))
    }
}

/// Level-set masses `nu(K_0), ..., nu(K_max)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelSetTable {
    pub q: u64,
    pub entries: Vec<(usize, ExactScalar)>,
}

impl LevelSetTable {
    pub fn new(rank: Rank, max: usize) -> Self {
        LevelSetTable {
            q: rank.q(),
            entries: (0..=max).map(|n| (n, nu_levelset(rank, n))).collect(),
        }
    }

    /// Running sums `nu(K_0) + ... + nu(K_n)`.
    pub fn partial_sums(&self) -> Vec<ExactScalar> {
        let mut acc = ExactScalar::zero();
        self.entries
            .iter()
            .map(|(_, m)| {
                acc += m;
                acc.clone()
            })
            .collect()
    }
}

/// `nu({(xi, omega) : d(xi, omega) > q^{-n}})` for `n >= 1`, with
/// `d = q^{-(.,.)}`. This is `nu(K_0) + ... + nu(K_{n-1}) = q^n / (q+1)`.
pub fn tail_distribution(rank: Rank, n: usize) -> Result<ExactScalar> {
    if n == 0 {
        return Err(Error::OutOfRange("tail_distribution needs n >= 1".into()));
    }
    let q = rank.q();
    Ok(ExactScalar::Finite(
        rational_pow(q, n as i64) / BigRational::from_integer(BigInt::from(q + 1)),
    ))
}

/// `mu` of the closed ball of radius `q^{-n}` around `omega`, which is the
/// depth-`n` cylinder containing `omega`.
pub fn ball_measure(rank: Rank, omega: &BoundaryPoint, n: usize) -> Result<ExactScalar> {
    if n == 0 {
        return Err(Error::OutOfRange("ball_measure needs n >= 1".into()));
    }
    Ok(mu_cylinder(rank, &omega.prefix(n)))
}

/// `mu({xi : (g, xi) = i})` for `g != e` and `0 <= i <= |g|`.
pub fn gromov_level_measure(rank: Rank, g: &Word, i: usize) -> Result<ExactScalar> {
    if g.is_identity() {
        return Err(Error::Precondition("level measures need g != identity".into()));
    }
    if i > g.len() {
        return Err(Error::OutOfRange(format!("level {i} exceeds |g| = {}", g.len())));
    }
    let w = if i == 0 || i == g.len() {
        endpoint_weight(rank)
    } else {
        interior_weight(rank)
    };
    Ok(ExactScalar::Finite(w * rational_pow(rank.q(), -(i as i64))))
}

/// Both sides of `mu(g Omega_x) = integral over Omega_x of |g'| d mu`. The
/// right side sums over the cylinders of depth `|x| + |g| + 1` below `x`,
/// on each of which `|g'|` is constant.
pub fn radon_nikodym_check(rank: Rank, g: &Word, x: &Word) -> (ExactScalar, ExactScalar) {
    let lhs = mu_set(&crate::group::image_of_cylinder(rank, g, x));
    let depth = x.len() + g.len() + 1;
    let rhs = rank
        .extensions(x, depth)
        .iter()
        .map(|c| {
            let d = derivative_on_cylinder(rank, g, c).expect("depth exceeds |g|");
            &d * &mu_cylinder(rank, c)
        })
        .sum();
    (lhs, rhs)
}

/// `c_g(xi, omega) = (g, xi) - (g, omega)`.
pub fn busemann_cocycle(g: &Word, xi: &BoundaryPoint, omega: &BoundaryPoint) -> i64 {
    xi.gromov_product_word(g) as i64 - omega.gromov_product_word(g) as i64
}
