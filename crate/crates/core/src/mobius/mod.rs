//! Möbius calculus on finite metric spaces: cross-ratios, metric
//! derivatives, the mean-value property and the inequalities derived from it.
//!
//! Maps are partial injections. A group element acting on a finite boundary
//! sample generally moves points out of the sample; it is then recorded only
//! on the points whose images stay inside, and every check runs over that
//! domain.

mod checks;
mod io;
mod scalar;

pub use checks::{
    alpha_bound_check, cocycle_bound_check, is_isometry, kappa, lipschitz_bound_check, AlphaReport, BoundReport, Kappa,
};
pub use io::{parse_map, parse_space, read_map, read_space, AnySpace};
pub use scalar::MetricScalar;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// A finite metric space given by its distance matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteMetricSpace<T> {
    labels: Vec<String>,
    dist: Vec<Vec<T>>,
}

impl<T: MetricScalar> FiniteMetricSpace<T> {
    /// Validates the metric axioms: zero diagonal, symmetry, positivity off
    /// the diagonal and the triangle inequality. Approximate spaces allow an
    /// absolute slack of `1e-12`.
    pub fn new(labels: Vec<String>, dist: Vec<Vec<T>>) -> Result<Self> {
        let n = labels.len();
        if dist.len() != n || dist.iter().any(|row| row.len() != n) {
            return Err(Error::MetricAxiom(format!("distance matrix is not {n}x{n}")));
        }
        let slack = T::axiom_slack();
        for i in 0..n {
            if dist[i][i].abs() > slack {
                return Err(Error::MetricAxiom(format!("d({0}, {0}) != 0", labels[i])));
            }
            for j in 0..i {
                if (dist[i][j].clone() - dist[j][i].clone()).abs() > slack {
                    return Err(Error::MetricAxiom(format!(
                        "d({}, {}) != d({}, {})",
                        labels[i], labels[j], labels[j], labels[i]
                    )));
                }
                if dist[i][j] <= T::zero() {
                    return Err(Error::MetricAxiom(format!(
                        "d({}, {}) is not positive",
                        labels[i], labels[j]
                    )));
                }
            }
        }
        let space = FiniteMetricSpace { labels, dist };
        if let Some((i, j, k)) = space.triangle_violation() {
            return Err(Error::MetricAxiom(format!(
                "triangle inequality fails: d({0}, {2}) > d({0}, {1}) + d({1}, {2})",
                space.labels[i], space.labels[j], space.labels[k]
            )));
        }
        Ok(space)
    }

    fn triangle_violation(&self) -> Option<(usize, usize, usize)> {
        let n = self.len();
        if let Some(m) = T::integer_matrix(&self.dist) {
            for i in 0..n {
                for k in 0..n {
                    for j in 0..n {
                        if m[i][k] > m[i][j] + m[j][k] {
                            return Some((i, j, k));
                        }
                    }
                }
            }
            return None;
        }
        let slack = T::axiom_slack();
        for i in 0..n {
            for k in 0..n {
                for j in 0..n {
                    let bound = self.dist[i][j].clone() + self.dist[j][k].clone() + slack.clone();
                    if self.dist[i][k] > bound {
                        return Some((i, j, k));
                    }
                }
            }
        }
        None
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn d(&self, i: usize, j: usize) -> &T {
        &self.dist[i][j]
    }

    pub fn matrix(&self) -> &[Vec<T>] {
        &self.dist
    }

    /// Largest distance among the given points.
    pub fn diameter_of(&self, points: &[usize]) -> T {
        let mut best = T::zero();
        for &i in points {
            for &j in points {
                if self.dist[i][j] > best {
                    best = self.dist[i][j].clone();
                }
            }
        }
        best
    }

    pub fn diameter(&self) -> T {
        self.diameter_of(&(0..self.len()).collect::<Vec<_>>())
    }
}

/// A partial injection of a finite point set into itself.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointMap {
    images: Vec<Option<usize>>,
}

impl PointMap {
    pub fn identity(n: usize) -> Self {
        PointMap {
            images: (0..n).map(Some).collect(),
        }
    }

    pub fn new(images: Vec<Option<usize>>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for (i, img) in images.iter().enumerate() {
            if let Some(j) = *img {
                if j >= n {
                    return Err(Error::InvalidMap(format!("image {j} of point {i} is out of range")));
                }
                if std::mem::replace(&mut seen[j], true) {
                    return Err(Error::InvalidMap(format!("point {j} has two preimages")));
                }
            }
        }
        Ok(PointMap { images })
    }

    pub fn from_permutation(perm: Vec<usize>) -> Result<Self> {
        PointMap::new(perm.into_iter().map(Some).collect())
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn apply(&self, i: usize) -> Option<usize> {
        self.images.get(i).copied().flatten()
    }

    pub fn images(&self) -> &[Option<usize>] {
        &self.images
    }

    pub fn domain(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.images[i].is_some()).collect()
    }

    pub fn is_total(&self) -> bool {
        self.images.iter().all(Option::is_some)
    }

    /// `self o other`: apply `other` first.
    pub fn compose(&self, other: &PointMap) -> PointMap {
        PointMap {
            images: other.images.iter().map(|i| i.and_then(|j| self.apply(j))).collect(),
        }
    }

    pub fn inverse(&self) -> PointMap {
        let mut images = vec![None; self.len()];
        for (i, img) in self.images.iter().enumerate() {
            if let Some(j) = *img {
                images[j] = Some(i);
            }
        }
        PointMap { images }
    }

    fn check_against<T>(&self, space: &FiniteMetricSpace<T>) -> Result<()> {
        if self.len() != space.labels.len() {
            return Err(Error::InvalidMap(format!(
                "map has {} entries but the space has {} points",
                self.len(),
                space.labels.len()
            )));
        }
        Ok(())
    }
}

fn distinct(points: &[usize]) -> bool {
    points.iter().enumerate().all(|(k, p)| !points[..k].contains(p))
}

/// `d(z1, z3) d(z2, z4) / (d(z1, z4) d(z2, z3))`.
pub fn cross_ratio<T: MetricScalar>(space: &FiniteMetricSpace<T>, z: [usize; 4]) -> Result<T> {
    if z.iter().any(|&i| i >= space.len()) || !distinct(&z) {
        return Err(Error::Precondition("cross-ratio needs four distinct points".into()));
    }
    let d = |a: usize, b: usize| space.dist[z[a]][z[b]].clone();
    Ok(d(0, 2) * d(1, 3) / (d(0, 3) * d(1, 2)))
}

#[derive(Clone, Debug)]
pub struct MobiusOptions {
    pub tolerance: f64,
    /// Enumerate every quadruple up to this many domain points.
    pub exhaustive_limit: usize,
    /// Number of random quadruples checked on larger domains.
    pub samples: usize,
    pub seed: u64,
}

impl Default for MobiusOptions {
    fn default() -> Self {
        MobiusOptions {
            tolerance: 0.0,
            exhaustive_limit: 40,
            samples: 100_000,
            seed: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MobiusReport<T> {
    pub holds: bool,
    /// Worst `max(r, 1/r) - 1` over cross-ratio quotients `r`.
    pub max_deviation: T,
    pub witness: Option<[usize; 4]>,
    pub quadruples: usize,
    pub exhaustive: bool,
}

/// Whether `d <= tol`, with `tol = 0` meaning exact equality to zero.
pub fn within_tolerance<T: MetricScalar>(d: &T, tol: f64) -> bool {
    if tol == 0.0 {
        d.is_zero()
    } else {
        d.to_f64() <= tol
    }
}

fn quadruples(domain: &[usize], opts: &MobiusOptions) -> (Vec<[usize; 4]>, bool) {
    let n = domain.len();
    if n < 4 {
        return (Vec::new(), true);
    }
    if n <= opts.exhaustive_limit {
        let mut out = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                for c in b + 1..n {
                    for d in c + 1..n {
                        out.push([domain[a], domain[b], domain[c], domain[d]]);
                    }
                }
            }
        }
        (out, true)
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let out = (0..opts.samples)
            .map(|_| {
                let s = sample(&mut rng, n, 4);
                [
                    domain[s.index(0)],
                    domain[s.index(1)],
                    domain[s.index(2)],
                    domain[s.index(3)],
                ]
            })
            .collect();
        (out, false)
    }
}

/// The three pairing products `d12 d34`, `d13 d24`, `d14 d23`. All
/// cross-ratios of the quadruple are quotients of two of them, so a map
/// preserves every cross-ratio exactly when it scales the three products by
/// a common factor.
fn pairings<T: Clone + std::ops::Mul<Output = T>>(m: &[Vec<T>], z: [usize; 4]) -> [T; 3] {
    let d = |a: usize, b: usize| m[z[a]][z[b]].clone();
    [d(0, 1) * d(2, 3), d(0, 2) * d(1, 3), d(0, 3) * d(1, 2)]
}

const PAIRS: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];

fn deviation<T: MetricScalar>(before: &[T; 3], after: &[T; 3]) -> T {
    let mut worst = T::zero();
    for (a, b) in PAIRS {
        let x = after[a].clone() * before[b].clone();
        let y = after[b].clone() * before[a].clone();
        let dev = if x > y { x / y } else { y / x } - T::one();
        if dev > worst {
            worst = dev;
        }
    }
    worst
}

/// Checks that `map` preserves cross-ratios on its domain.
pub fn is_mobius<T: MetricScalar>(
    space: &FiniteMetricSpace<T>,
    map: &PointMap,
    opts: &MobiusOptions,
) -> Result<MobiusReport<T>> {
    map.check_against(space)?;
    let domain = map.domain();
    let (quads, exhaustive) = quadruples(&domain, opts);
    let image = |z: [usize; 4]| z.map(|i| map.apply(i).expect("quadruple inside the domain"));
    let mut worst = T::zero();
    let mut witness = None;
    if let Some(m) = T::integer_matrix(&space.dist) {
        let wide: Vec<Vec<u128>> = m.iter().map(|r| r.iter().map(|&v| v as u128).collect()).collect();
        for &z in &quads {
            let before = pairings(&wide, z);
            let after = pairings(&wide, image(z));
            let equal = PAIRS.iter().all(|&(a, b)| after[a] * before[b] == after[b] * before[a]);
            if !equal {
                let dev = deviation(&before.map(|v| T::from_u128(v)), &after.map(|v| T::from_u128(v)));
                if dev > worst {
                    worst = dev;
                    witness = Some(z);
                }
            }
        }
    } else {
        for &z in &quads {
            let dev = deviation(&pairings(&space.dist, z), &pairings(&space.dist, image(z)));
            if dev > worst {
                worst = dev;
                witness = Some(z);
            }
        }
    }
    Ok(MobiusReport {
        holds: within_tolerance(&worst, opts.tolerance),
        max_deviation: worst,
        witness,
        quadruples: quads.len(),
        exhaustive,
    })
}

/// The local formula
/// `|g'|(x) = d(gx,gu)/d(x,u) * d(gx,gv)/d(x,v) * d(u,v)/d(gu,gv)`.
pub fn metric_derivative<T: MetricScalar>(
    space: &FiniteMetricSpace<T>,
    map: &PointMap,
    x: usize,
    u: usize,
    v: usize,
) -> Result<T> {
    map.check_against(space)?;
    if !distinct(&[x, u, v]) {
        return Err(Error::Precondition("metric derivative needs distinct x, u, v".into()));
    }
    let img = |i: usize| {
        map.apply(i)
            .ok_or_else(|| Error::Precondition(format!("point {i} is outside the map's domain")))
    };
    let (gx, gu, gv) = (img(x)?, img(u)?, img(v)?);
    let d = |a: usize, b: usize| space.dist[a][b].clone();
    Ok(d(gx, gu) / d(x, u) * (d(gx, gv) / d(x, v)) * (d(u, v) / d(gu, gv)))
}

/// `|g'|` on the domain of `map`, each value computed from the first two
/// other domain points. `None` off the domain.
pub fn derivative_table<T: MetricScalar>(space: &FiniteMetricSpace<T>, map: &PointMap) -> Result<Vec<Option<T>>> {
    map.check_against(space)?;
    let domain = map.domain();
    if domain.len() < 3 {
        return Err(Error::Precondition(
            "metric derivatives need at least three points in the domain".into(),
        ));
    }
    let mut table = vec![None; space.len()];
    for &x in &domain {
        let mut others = domain.iter().copied().filter(|&y| y != x);
        let (u, v) = (others.next().unwrap(), others.next().unwrap());
        table[x] = Some(metric_derivative(space, map, x, u, v)?);
    }
    Ok(table)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Residual<T> {
    pub max: T,
    pub witness: Option<Vec<usize>>,
    pub checked: usize,
}

impl<T: MetricScalar> Residual<T> {
    fn new() -> Self {
        Residual {
            max: T::zero(),
            witness: None,
            checked: 0,
        }
    }

    fn record(&mut self, value: T, witness: Vec<usize>) {
        self.checked += 1;
        if value > self.max {
            self.max = value;
            self.witness = Some(witness);
        }
    }
}

/// Largest change of the local formula under a change of auxiliary points:
/// `|g'_{u,v}(x) - g'_{u0,v0}(x)|`. Zero for Möbius maps. Up to
/// `pairs_per_point` auxiliary pairs are tried per point.
pub fn derivative_spread<T: MetricScalar>(
    space: &FiniteMetricSpace<T>,
    map: &PointMap,
    table: &[Option<T>],
    pairs_per_point: usize,
) -> Result<Residual<T>> {
    let domain = map.domain();
    let mut res = Residual::new();
    for &x in &domain {
        let Some(base) = &table[x] else { continue };
        let others: Vec<usize> = domain.iter().copied().filter(|&y| y != x).collect();
        let mut tried = 0;
        'outer: for (a, &u) in others.iter().enumerate() {
            for &v in &others[a + 1..] {
                if tried == pairs_per_point {
                    break 'outer;
                }
                tried += 1;
                let val = metric_derivative(space, map, x, u, v)?;
                res.record((val - base.clone()).abs(), vec![x, u, v]);
            }
        }
    }
    Ok(res)
}

/// Geometric mean-value residual
/// `max |d^2(gx, gy) - |g'|(x) |g'|(y) d^2(x, y)|` over domain pairs.
pub fn check_mean_value<T: MetricScalar>(
    space: &FiniteMetricSpace<T>,
    map: &PointMap,
    deriv: &[Option<T>],
) -> Result<Residual<T>> {
    map.check_against(space)?;
    if deriv.len() != space.len() {
        return Err(Error::Precondition("derivative table has the wrong length".into()));
    }
    let domain = map.domain();
    let mut res = Residual::new();
    for (a, &x) in domain.iter().enumerate() {
        for &y in &domain[a + 1..] {
            let (Some(dx), Some(dy)) = (&deriv[x], &deriv[y]) else {
                return Err(Error::Precondition(format!("no derivative at point {x} or {y}")));
            };
            let gx = map.apply(x).unwrap();
            let gy = map.apply(y).unwrap();
            let lhs = space.dist[gx][gy].clone() * space.dist[gx][gy].clone();
            let rhs = dx.clone() * dy.clone() * space.dist[x][y].clone() * space.dist[x][y].clone();
            res.record((lhs - rhs).abs(), vec![x, y]);
        }
    }
    Ok(res)
}

/// Chain rule residual `max |(gh)'(x) - |g'|(hx) |h'|(x)|` over the points
/// where `gh` is defined.
pub fn check_chain_rule<T: MetricScalar>(
    space: &FiniteMetricSpace<T>,
    g: &PointMap,
    h: &PointMap,
) -> Result<Residual<T>> {
    let gh = g.compose(h);
    let dg = derivative_table(space, g)?;
    let dh = derivative_table(space, h)?;
    let dgh = derivative_table(space, &gh)?;
    let mut res = Residual::new();
    for x in gh.domain() {
        let hx = h.apply(x).unwrap();
        let lhs = dgh[x].clone().unwrap();
        let rhs = dg[hx].clone().unwrap() * dh[x].clone().unwrap();
        res.record((lhs - rhs).abs(), vec![x]);
    }
    Ok(res)
}

/// Largest and smallest value of a derivative table.
pub fn derivative_extremes<T: MetricScalar>(deriv: &[Option<T>]) -> Option<(T, T)> {
    let mut it = deriv.iter().flatten();
    let first = it.next()?.clone();
    let (mut lo, mut hi) = (first.clone(), first);
    for v in it {
        if *v < lo {
            lo = v.clone();
        }
        if *v > hi {
            hi = v.clone();
        }
    }
    Some((hi, lo))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;
    use num_traits::Zero;

    fn exact(n: i64, d: i64) -> BigRational {
        crate::scalar::ratio(n, d)
    }

    fn uniform(n: usize) -> FiniteMetricSpace<BigRational> {
        let dist = (0..n)
            .map(|i| (0..n).map(|j| if i == j { exact(0, 1) } else { exact(1, 1) }).collect())
            .collect();
        FiniteMetricSpace::new((0..n).map(|i| format!("p{i}")).collect(), dist).unwrap()
    }

    /// Points on a line at the given rational positions.
    fn line(xs: &[i64]) -> FiniteMetricSpace<BigRational> {
        let dist = xs
            .iter()
            .map(|a| xs.iter().map(|b| exact((a - b).abs(), 1)).collect())
            .collect();
        FiniteMetricSpace::new(xs.iter().map(|x| x.to_string()).collect(), dist).unwrap()
    }

    #[test]
    fn cross_ratio_examples() {
        let s = uniform(4);
        assert_eq!(cross_ratio(&s, [0, 1, 2, 3]).unwrap(), exact(1, 1));
        let l = line(&[0, 1, 3, 7, 12]);
        let c = cross_ratio(&l, [0, 1, 2, 3]).unwrap();
        let swapped = cross_ratio(&l, [0, 1, 3, 2]).unwrap();
        assert_eq!(c * swapped, exact(1, 1));
        assert!(cross_ratio(&l, [0, 1, 1, 3]).is_err());
    }

    #[test]
    fn identity_and_transposition() {
        let l = line(&[0, 1, 3, 7, 12, 20]);
        let r = is_mobius(&l, &PointMap::identity(6), &MobiusOptions::default()).unwrap();
        assert!(r.holds);
        assert!(r.max_deviation.is_zero());
        assert_eq!(r.quadruples, 15);
        let swap = PointMap::from_permutation(vec![1, 0, 2, 3, 4, 5]).unwrap();
        let r = is_mobius(&l, &swap, &MobiusOptions::default()).unwrap();
        assert!(!r.holds);
        assert!(r.witness.is_some());
        // the fast integer path and the rational path agree
        let f: FiniteMetricSpace<f64> = FiniteMetricSpace::new(
            l.labels().to_vec(),
            l.matrix()
                .iter()
                .map(|r| r.iter().map(MetricScalar::to_f64).collect())
                .collect(),
        )
        .unwrap();
        let rf = is_mobius(
            &f,
            &swap,
            &MobiusOptions {
                tolerance: 1e-9,
                ..Default::default()
            },
        )
        .unwrap();
        assert!((rf.max_deviation - r.max_deviation.to_f64()).abs() < 1e-12);
    }

    #[test]
    fn line_reflection_is_an_isometry() {
        let l = line(&[0, 1, 3, 4]);
        let flip = PointMap::from_permutation(vec![3, 2, 1, 0]).unwrap();
        assert!(is_mobius(&l, &flip, &MobiusOptions::default()).unwrap().holds);
        let t = derivative_table(&l, &flip).unwrap();
        assert!(t.iter().all(|v| v.as_ref().unwrap() == &exact(1, 1)));
        assert!(check_mean_value(&l, &flip, &t).unwrap().max.is_zero());
        assert!(is_isometry(&l, &flip));
    }

    #[test]
    fn perturbed_derivative_has_residual() {
        let l = line(&[0, 1, 3, 4]);
        let id = PointMap::identity(4);
        let mut t = derivative_table(&l, &id).unwrap();
        assert!(check_mean_value(&l, &id, &t).unwrap().max.is_zero());
        t[0] = Some(exact(2, 1));
        assert!(!check_mean_value(&l, &id, &t).unwrap().max.is_zero());
    }

    #[test]
    fn axioms_are_validated() {
        let bad = vec![
            vec![exact(0, 1), exact(1, 1), exact(5, 1)],
            vec![exact(1, 1), exact(0, 1), exact(1, 1)],
            vec![exact(5, 1), exact(1, 1), exact(0, 1)],
        ];
        let labels = vec!["a".into(), "b".into(), "c".into()];
        assert!(matches!(
            FiniteMetricSpace::new(labels.clone(), bad),
            Err(Error::MetricAxiom(_))
        ));
        let asym = vec![
            vec![exact(0, 1), exact(1, 1), exact(1, 1)],
            vec![exact(2, 1), exact(0, 1), exact(1, 1)],
            vec![exact(1, 1), exact(1, 1), exact(0, 1)],
        ];
        assert!(FiniteMetricSpace::new(labels, asym).is_err());
    }

    #[test]
    fn maps_are_validated() {
        assert!(PointMap::new(vec![Some(0), Some(0)]).is_err());
        assert!(PointMap::new(vec![Some(2), None]).is_err());
        let m = PointMap::new(vec![Some(1), None, Some(0)]).unwrap();
        assert_eq!(m.domain(), vec![0, 2]);
        assert_eq!(m.inverse().apply(1), Some(0));
        assert_eq!(m.compose(&m).domain(), vec![2]);
    }
}
