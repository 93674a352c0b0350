//! Finite boundary samples as exact metric spaces, and the partial maps
//! induced on them by group elements.
//!
//! The visual metric is `d(xi, omega) = q^{-(xi, omega)}`.
//!
//! A nontrivial element of a free group has exactly two fixed points on the
//! boundary and every other orbit is infinite, so a finite sample is never
//! invariant under it unless the sample consists of those fixed points.
//! [`extend_by_images`] therefore builds `S`, `g_1 S`, ..., `g_k S` together,
//! and each element acts as a partial map on the result. [`orbit_closure`]
//! attempts genuine invariance and reports the point whose orbit escapes.

use std::collections::{BTreeSet, HashMap, VecDeque};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rand::Rng;

use crate::error::{Error, Result};
use crate::group::{BoundaryPoint, GromovProduct, Rank, Word};
use crate::mobius::{FiniteMetricSpace, PointMap};
use crate::scalar::rational_pow;

pub const DEFAULT_CLOSURE_CAP: usize = 10_000;

/// `count` distinct random boundary points with preperiod at most
/// `max_pre` letters and period at most `max_period` letters, in the order
/// drawn.
pub fn random_boundary_points<R: Rng + ?Sized>(
    rank: Rank,
    count: usize,
    max_pre: usize,
    max_period: usize,
    rng: &mut R,
) -> Vec<BoundaryPoint> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0usize;
    while out.len() < count {
        attempts += 1;
        assert!(attempts < 1000 * (count + 10), "boundary point pool is too small");
        let xi = rank.random_boundary(max_pre, max_period.max(1), rng);
        if seen.insert(xi.clone()) {
            out.push(xi);
        }
    }
    out
}

/// The exact space on `points` with the visual metric.
pub fn boundary_space(rank: Rank, points: &[BoundaryPoint]) -> Result<FiniteMetricSpace<BigRational>> {
    let q = rank.q();
    let dist = points
        .iter()
        .map(|a| {
            points
                .iter()
                .map(|b| match a.gromov_product(b) {
                    GromovProduct::Infinite => BigRational::zero(),
                    GromovProduct::Finite(k) => rational_pow(q, -(k as i64)),
                })
                .collect()
        })
        .collect();
    FiniteMetricSpace::new(points.iter().map(|p| p.to_string()).collect(), dist)
}

/// `g` as a partial map on `points`: defined where `g xi` is again a point.
pub fn action_map(points: &[BoundaryPoint], g: &Word) -> PointMap {
    let index: HashMap<&BoundaryPoint, usize> = points.iter().enumerate().map(|(i, p)| (p, i)).collect();
    let images = points.iter().map(|p| index.get(&p.act(g)).copied()).collect();
    PointMap::new(images).expect("group elements act injectively")
}

/// `S` followed by the new points of `g_1 S`, ..., `g_k S`, without repeats.
pub fn extend_by_images(base: &[BoundaryPoint], elements: &[Word]) -> Vec<BoundaryPoint> {
    let mut seen: BTreeSet<BoundaryPoint> = base.iter().cloned().collect();
    let mut out = base.to_vec();
    for g in elements {
        for p in base {
            let img = p.act(g);
            if seen.insert(img.clone()) {
                out.push(img);
            }
        }
    }
    out
}

/// Smallest superset of `base` invariant under the given elements and their
/// inverses, or an error naming an element and the base point whose orbit
/// grows past `cap` points.
pub fn orbit_closure(base: &[BoundaryPoint], elements: &[Word], cap: usize) -> Result<Vec<BoundaryPoint>> {
    let mut gens: Vec<Word> = Vec::new();
    for g in elements.iter().filter(|g| !g.is_identity()) {
        gens.push(g.clone());
        gens.push(g.inverse());
    }
    let mut seen: BTreeSet<BoundaryPoint> = BTreeSet::new();
    let mut out = Vec::new();
    // each queued point remembers the base point it was reached from
    let mut queue = VecDeque::new();
    for (i, p) in base.iter().enumerate() {
        if seen.insert(p.clone()) {
            out.push(p.clone());
            queue.push_back((p.clone(), i));
        }
    }
    while let Some((p, origin)) = queue.pop_front() {
        for g in &gens {
            let img = p.act(g);
            if seen.insert(img.clone()) {
                if out.len() >= cap {
                    return Err(Error::NotClosed {
                        element: g.to_string(),
                        point: base[origin].to_string(),
                    });
                }
                out.push(img.clone());
                queue.push_back((img, origin));
            }
        }
    }
    Ok(out)
}

/// Exact `|g'|` on a sample point: `q^{2 (g^{-1}, xi) - |g|}`.
pub fn tree_derivative(rank: Rank, g: &Word, xi: &BoundaryPoint) -> BigRational {
    let k = 2 * xi.gromov_product_word(&g.inverse()) as i64 - g.len() as i64;
    rational_pow(rank.q(), k)
}

/// The distance value `q^{-k}` as a rational, for display and tests.
pub fn visual_distance(q: u64, k: usize) -> BigRational {
    BigRational::new(BigInt::from(1), num_traits::pow(BigInt::from(q), k))
}
