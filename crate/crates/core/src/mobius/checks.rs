//! Inequalities satisfied by the metric derivative of a Möbius map. Each is
//! checked over the domain of the map, with diameter, maximum and minimum
//! taken over that domain.

use super::{derivative_extremes, metric_derivative, FiniteMetricSpace, MetricScalar, PointMap};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct BoundReport {
    pub holds: bool,
    /// Largest left side over right side, in floating point; `<= 1` when the
    /// bound holds.
    pub worst_ratio: f64,
    pub worst_pair: Option<(usize, usize)>,
    pub pairs: usize,
}

struct Tally {
    worst: (f64, Option<(usize, usize)>),
    failure: Option<(usize, usize)>,
    pairs: usize,
}

impl Tally {
    fn new() -> Self {
        Tally {
            worst: (f64::NEG_INFINITY, None),
            failure: None,
            pairs: 0,
        }
    }

    fn record(&mut self, ok: bool, ratio: f64, pair: (usize, usize)) {
        self.pairs += 1;
        if !ok && self.failure.is_none() {
            self.failure = Some(pair);
        }
        if ratio > self.worst.0 {
            self.worst = (ratio, Some(pair));
        }
    }

    /// The witness is the first failing pair, or the tightest pair.
    fn finish(self) -> BoundReport {
        BoundReport {
            holds: self.failure.is_none(),
            worst_ratio: self.worst.0,
            worst_pair: self.failure.or(self.worst.1),
            pairs: self.pairs,
        }
    }
}

struct Setup<T> {
    domain: Vec<usize>,
    diam: T,
    max: T,
    min: T,
}

fn setup<T: MetricScalar>(space: &FiniteMetricSpace<T>, map: &PointMap, deriv: &[Option<T>]) -> Result<Setup<T>> {
    let domain = map.domain();
    if domain.len() < 2 {
        return Err(Error::Precondition("need at least two points in the domain".into()));
    }
    if domain.iter().any(|&x| deriv.get(x).is_none_or(Option::is_none)) {
        return Err(Error::Precondition("derivative table does not cover the domain".into()));
    }
    let (max, min) = derivative_extremes(deriv).unwrap();
    if min <= T::zero() {
        return Err(Error::Precondition("derivative must be positive".into()));
    }
    Ok(Setup {
        diam: space.diameter_of(&domain),
        domain,
        max,
        min,
    })
}

/// `sqrt|g'|(x) - sqrt|g'|(y) <= (4 / diam) (max|g'| / sqrt(min|g'|)) d(x, y)`
/// on all ordered pairs. Multiplying through by `sqrt(min)` and writing
/// `A = |g'|(x) min`, `B = |g'|(y) min`, `R = 4 max d / diam`, this is
/// `sqrt A - sqrt B <= R`, decided by squaring after sign analysis.
pub fn lipschitz_bound_check<T: MetricScalar>(
    space: &FiniteMetricSpace<T>,
    map: &PointMap,
    deriv: &[Option<T>],
) -> Result<BoundReport> {
    let s = setup(space, map, deriv)?;
    let four = T::from_ratio(4, 1);
    let mut tally = Tally::new();
    for &x in &s.domain {
        for &y in &s.domain {
            if x == y {
                continue;
            }
            let a = deriv[x].clone().unwrap();
            let b = deriv[y].clone().unwrap();
            let d = space.d(x, y).clone();
            let big_a = a.clone() * s.min.clone();
            let big_b = b.clone() * s.min.clone();
            let r = four.clone() * s.max.clone() * d.clone() / s.diam.clone();
            let ok = if big_a <= big_b {
                true
            } else {
                let lhs = big_a - big_b.clone() - r.clone() * r.clone();
                lhs <= T::zero() || lhs.clone() * lhs <= T::from_ratio(4, 1) * r.clone() * r * big_b
            };
            let ratio = (a.to_f64().sqrt() - b.to_f64().sqrt())
                / (4.0 / s.diam.to_f64() * s.max.to_f64() / s.min.to_f64().sqrt() * d.to_f64());
            tally.record(ok, ratio, (x, y));
        }
    }
    Ok(tally.finish())
}

/// `|log|g'|(x) - log|g'|(y)| <= (8 / diam) (max|g'| / min|g'|) d(x, y)`,
/// the bound on the cocycle by the metric. In exact mode the logarithm is
/// avoided: the quotient of the two derivative values is compared with
/// certified bounds on the exponential of the right side.
pub fn cocycle_bound_check<T: MetricScalar>(
    space: &FiniteMetricSpace<T>,
    map: &PointMap,
    deriv: &[Option<T>],
) -> Result<BoundReport> {
    let s = setup(space, map, deriv)?;
    let eight = T::from_ratio(8, 1);
    let mut tally = Tally::new();
    for (i, &x) in s.domain.iter().enumerate() {
        for &y in &s.domain[i + 1..] {
            let a = deriv[x].clone().unwrap();
            let b = deriv[y].clone().unwrap();
            let quotient = if a > b {
                a.clone() / b.clone()
            } else {
                b.clone() / a.clone()
            };
            let d = space.d(x, y).clone();
            let r = eight.clone() * s.max.clone() * d.clone() / (s.diam.clone() * s.min.clone());
            let ok = quotient.le_exp(&r);
            let ratio = (a.to_f64().ln() - b.to_f64().ln()).abs() / r.to_f64();
            tally.record(ok, ratio, (x, y));
        }
    }
    Ok(tally.finish())
}

#[derive(Clone, Debug, PartialEq)]
pub struct Kappa<T> {
    pub value: T,
    /// A pair of centers whose two open `value`-balls fail to cover.
    pub centers: (usize, usize),
}

/// The largest `kappa` such that no two open `kappa`-balls centered at the
/// given points cover them: the minimum over center pairs (equal centers
/// allowed) of the largest distance from a point to its nearer center.
pub fn kappa<T: MetricScalar>(space: &FiniteMetricSpace<T>, points: &[usize]) -> Result<Kappa<T>> {
    if points.len() < 3 {
        return Err(Error::Precondition("kappa needs at least three points".into()));
    }
    let mut best: Option<Kappa<T>> = None;
    for (i, &c1) in points.iter().enumerate() {
        for &c2 in &points[i..] {
            let mut far = T::zero();
            for &x in points {
                let near = if space.d(c1, x) < space.d(c2, x) {
                    space.d(c1, x)
                } else {
                    space.d(c2, x)
                };
                if *near > far {
                    far = near.clone();
                }
            }
            if best.as_ref().is_none_or(|b| far < b.value) {
                best = Some(Kappa {
                    value: far,
                    centers: (c1, c2),
                });
            }
        }
    }
    Ok(best.unwrap())
}

#[derive(Clone, Debug, PartialEq)]
pub struct AlphaReport<T> {
    pub applicable: bool,
    pub holds: bool,
    /// `D(g) = max d(gx, x)` over the domain.
    pub displacement: T,
    pub kappa: T,
    pub witness: Option<usize>,
}

/// For `D(g) <= kappa / 10`, checks `-6 D / kappa <= |g'|(x) - 1 <= 8 D / kappa`
/// at every domain point, with `|g'|(x)` from the local formula at points
/// `u, v` that are pairwise `kappa`-separated from `x`.
pub fn alpha_bound_check<T: MetricScalar>(space: &FiniteMetricSpace<T>, map: &PointMap) -> Result<AlphaReport<T>> {
    let domain = map.domain();
    let k = kappa(space, &domain)?.value;
    let mut disp = T::zero();
    for &x in &domain {
        let d = space.d(x, map.apply(x).unwrap());
        if *d > disp {
            disp = d.clone();
        }
    }
    let mut report = AlphaReport {
        applicable: T::from_ratio(10, 1) * disp.clone() <= k,
        holds: true,
        displacement: disp.clone(),
        kappa: k.clone(),
        witness: None,
    };
    if !report.applicable {
        return Ok(report);
    }
    let lower = -(T::from_ratio(6, 1) * disp.clone());
    let upper = T::from_ratio(8, 1) * disp;
    for &x in &domain {
        let far = |p: usize| *space.d(x, p) >= k;
        let u = domain.iter().copied().find(|&u| far(u));
        let v = u.and_then(|u| domain.iter().copied().find(|&v| far(v) && *space.d(u, v) >= k));
        let (Some(u), Some(v)) = (u, v) else {
            return Err(Error::Precondition(format!("no kappa-separated pair for point {x}")));
        };
        let dev = (metric_derivative(space, map, x, u, v)? - T::one()) * k.clone();
        if dev < lower || dev > upper {
            report.holds = false;
            report.witness = Some(x);
            break;
        }
    }
    Ok(report)
}

/// Whether `map` preserves every distance on its domain (up to the axiom
/// slack in approximate mode).
pub fn is_isometry<T: MetricScalar>(space: &FiniteMetricSpace<T>, map: &PointMap) -> bool {
    let domain = map.domain();
    domain.iter().all(|&x| {
        domain.iter().all(|&y| {
            let d = space.d(map.apply(x).unwrap(), map.apply(y).unwrap()).clone();
            (d - space.d(x, y).clone()).abs() <= T::axiom_slack()
        })
    })
}
