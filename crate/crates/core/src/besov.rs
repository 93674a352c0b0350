//! Edge-differential seminorms on Cayley balls, Besov seminorms on the
//! boundary, and the Busemann function `x -> (g, x)` that links the two.
//!
//! A [`GroupFunction`] is stored by its marks: `phi(x)` is the value at the
//! longest marked prefix of `x`, and the identity is always marked. A full
//! vertex table is a special case. This keeps functions such as the
//! Busemann function, which is constant off a single path, small at any
//! radius.

use std::collections::BTreeMap;
use std::ops::Bound;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Pow, Zero};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::group::{Rank, Word};
use crate::measure::{cocycle_lp_norm_p, endpoint_weight, norm_brackets, BoundaryFunction};
use crate::scalar::ExactScalar;

/// The ball of radius `R` about the identity in the Cayley tree.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CayleyBall {
    pub rank: Rank,
    pub radius: usize,
}

impl CayleyBall {
    pub fn new(rank: Rank, radius: usize) -> Self {
        CayleyBall { rank, radius }
    }

    /// `1 + (q+1)(q^R - 1)/(q - 1)`.
    pub fn vertex_count(&self) -> BigInt {
        let q = BigInt::from(self.rank.q());
        let qr: BigInt = Pow::pow(&q, self.radius as u32);
        BigInt::from(1) + (&q + 1) * (qr - 1) / (&q - 1)
    }

    /// One parent edge per non-identity vertex.
    pub fn edge_count(&self) -> BigInt {
        self.vertex_count() - 1
    }

    pub fn contains(&self, x: &Word) -> bool {
        x.len() <= self.radius
    }

    /// All vertices in sphere order. Exponential in the radius.
    pub fn vertices(&self) -> Vec<Word> {
        (0..=self.radius).flat_map(|k| self.rank.sphere(k)).collect()
    }

    /// Rejects radii below `max(|g|, N) + 1`.
    pub fn require_radius(&self, need: usize) -> Result<()> {
        if self.radius < need + 1 {
            return Err(Error::Precondition(format!(
                "ball radius {} is too small; need at least {}",
                self.radius,
                need + 1
            )));
        }
        Ok(())
    }
}

/// A function on the group given by its values at marked vertices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupFunction {
    rank: Rank,
    marks: BTreeMap<Word, ExactScalar>,
}

impl GroupFunction {
    pub fn new(rank: Rank, marks: BTreeMap<Word, ExactScalar>) -> Result<Self> {
        if !marks.contains_key(&Word::identity()) {
            return Err(Error::Precondition("the identity vertex must carry a value".into()));
        }
        if let Some(w) = marks.keys().find(|w| !rank.contains(w)) {
            return Err(Error::Precondition(format!("{w} is not a rank-{} word", rank.n())));
        }
        if marks.values().any(ExactScalar::is_infinite) {
            return Err(Error::Precondition("values must be finite".into()));
        }
        Ok(GroupFunction { rank, marks })
    }

    pub fn constant(rank: Rank, value: ExactScalar) -> Self {
        GroupFunction {
            rank,
            marks: BTreeMap::from([(Word::identity(), value)]),
        }
    }

    /// The indicator of the identity vertex.
    pub fn identity_indicator(rank: Rank) -> Self {
        let mut marks: BTreeMap<Word, ExactScalar> =
            rank.sphere(1).into_iter().map(|w| (w, ExactScalar::zero())).collect();
        marks.insert(Word::identity(), ExactScalar::one());
        GroupFunction { rank, marks }
    }

    /// JSON object mapping words (`""` or `"e"` for the identity) to
    /// `"n/d"` strings or integers.
    pub fn from_json(rank: Rank, text: &str) -> Result<Self> {
        let bad = |reason: &str| Error::Parse {
            what: "group function",
            input: text.chars().take(60).collect(),
            reason: reason.into(),
        };
        let v: Value = serde_json::from_str(text)?;
        let obj = v.as_object().ok_or_else(|| bad("expected an object"))?;
        let mut marks = BTreeMap::new();
        for (k, val) in obj {
            let w = rank.parse_word(k)?;
            let s = match val {
                Value::String(s) => s.parse::<ExactScalar>()?,
                Value::Number(n) => n
                    .as_i64()
                    .map(ExactScalar::integer)
                    .ok_or_else(|| bad("numbers must be integers; use \"n/d\" strings"))?,
                _ => return Err(bad("values must be strings or integers")),
            };
            marks.insert(w, s);
        }
        GroupFunction::new(rank, marks)
    }

    pub fn rank(&self) -> Rank {
        self.rank
    }

    pub fn marks(&self) -> &BTreeMap<Word, ExactScalar> {
        &self.marks
    }

    pub fn value(&self, x: &Word) -> &ExactScalar {
        (0..=x.len())
            .rev()
            .find_map(|k| self.marks.get(&x.prefix(k)))
            .expect("identity is marked")
    }

    /// Marks strictly below `v` at depth at most `max_depth`.
    fn has_marks_below(&self, v: &Word, max_depth: usize) -> bool {
        self.marks
            .range((Bound::Excluded(v.clone()), Bound::Unbounded))
            .take_while(|(w, _)| v.is_prefix_of(w))
            .any(|(w, _)| w.len() <= max_depth)
    }
}

/// `sum over edges (x, xs) of the ball of |phi(x) - phi(xs)|^p`. Only edges
/// ending at a marked vertex can contribute.
pub fn ep_seminorm_p(phi: &GroupFunction, ball: &CayleyBall, p: u32) -> ExactScalar {
    phi.marks
        .iter()
        .filter(|(y, _)| !y.is_identity() && ball.contains(y))
        .map(|(y, v)| (phi.value(&y.parent().unwrap()) - v).abs().powi(p))
        .sum()
}

/// `phi(x) = (g, x)`: marks `g_1 ... g_i -> i`.
pub fn busemann_function(g: &Word, rank: Rank) -> GroupFunction {
    let marks = (0..=g.len())
        .map(|i| (g.prefix(i), ExactScalar::integer(i as i64)))
        .collect();
    GroupFunction { rank, marks }
}

/// The boundary values of `phi` at depth `depth`: on each cylinder the
/// value `phi` settles to along every branch inside `ball`. Fails on a
/// depth-`depth` cylinder below which `phi` still changes within the ball.
pub fn boundary_extension(phi: &GroupFunction, ball: &CayleyBall, depth: usize) -> Result<BoundaryFunction> {
    if depth > ball.radius {
        return Err(Error::Precondition(format!(
            "depth {depth} exceeds the ball radius {}",
            ball.radius
        )));
    }
    let mut cells = BTreeMap::new();
    let mut stack = vec![Word::identity()];
    while let Some(v) = stack.pop() {
        if !phi.has_marks_below(&v, ball.radius) {
            cells.insert(v.clone(), phi.value(&v).clone());
        } else if v.len() == depth {
            return Err(Error::ExtensionUndefined {
                depth,
                cell: v.to_string(),
            });
        } else {
            stack.extend(phi.rank.children(&v));
        }
    }
    BoundaryFunction::new(phi.rank, cells)
}

/// `iint |f(xi) - f(omega)|^p q^{2 (xi, omega)} d mu d mu`.
///
/// Distinct cells of the partition are never nested, so every rectangle
/// has finite measure `(q/(q+1))^2 q^{2 (x, y) - |x| - |y|}`. Cells are
/// grouped by value and the geometric weights summed as integers scaled by
/// `q^{2 depth}`.
pub fn besov_seminorm_p(f: &BoundaryFunction, p: u32) -> ExactScalar {
    let rank = f.rank();
    let q = rank.q();
    let cells: Vec<(&Word, &ExactScalar)> = f.cells().iter().collect();
    let depth = cells.iter().map(|(w, _)| w.len()).max().unwrap_or(0);
    let mut values: Vec<&ExactScalar> = cells.iter().map(|(_, v)| *v).collect();
    values.sort();
    values.dedup();
    if values.len() < 2 {
        return ExactScalar::zero();
    }
    let idx: BTreeMap<&ExactScalar, usize> = values.iter().enumerate().map(|(i, v)| (*v, i)).collect();
    let powers: Vec<BigInt> = {
        let mut out = vec![BigInt::from(1)];
        for k in 1..=2 * depth {
            out.push(&out[k - 1] * q);
        }
        out
    };
    let k = values.len();
    let mut weight = vec![BigInt::zero(); k * k];
    for (i, (x, vx)) in cells.iter().enumerate() {
        let a = idx[vx];
        for (y, vy) in &cells[i + 1..] {
            let b = idx[vy];
            if a == b {
                continue;
            }
            let e = 2 * depth + 2 * x.gromov_product(y) - x.len() - y.len();
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            weight[lo * k + hi] += &powers[e];
        }
    }
    let mut total = BigRational::zero();
    for a in 0..k {
        for b in a + 1..k {
            let w = &weight[a * k + b];
            if w.is_zero() {
                continue;
            }
            let diff = (values[b] - values[a]).powi(p).into_rational().unwrap();
            total += diff * BigRational::from_integer(w.clone());
        }
    }
    let e = endpoint_weight(rank);
    let scale = BigRational::from_integer(powers[2 * depth].clone());
    ExactScalar::Finite(BigRational::from_integer(BigInt::from(2)) * &e * &e * total / scale)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProperRow {
    pub element: Word,
    pub length: usize,
    pub ep_p: ExactScalar,
    pub besov_p: ExactScalar,
    pub lower_bracket: ExactScalar,
    pub upper_bracket: ExactScalar,
}

impl ProperRow {
    pub fn within_brackets(&self) -> bool {
        self.lower_bracket <= self.besov_p && self.besov_p <= self.upper_bracket
    }
}

/// For each element: the `E_p` seminorm of its Busemann function on the
/// ball of radius `|g| + 1`, the Besov seminorm of its boundary extension,
/// and the level-measure brackets. Needs `p > 1`, the dimension of the
/// boundary.
pub fn properness_table(rank: Rank, elements: &[Word], p: u32) -> Result<Vec<ProperRow>> {
    if p <= 1 {
        return Err(Error::Precondition(format!(
            "properness needs p > 1, the boundary dimension; got p = {p}"
        )));
    }
    elements
        .iter()
        .map(|g| {
            let ball = CayleyBall::new(rank, g.len() + 1);
            let phi = busemann_function(g, rank);
            let f = boundary_extension(&phi, &ball, g.len())?;
            let b = norm_brackets(rank, g.len(), p);
            Ok(ProperRow {
                element: g.clone(),
                length: g.len(),
                ep_p: ep_seminorm_p(&phi, &ball, p),
                besov_p: besov_seminorm_p(&f, p),
                lower_bracket: b.lower,
                upper_bracket: b.upper,
            })
        })
        .collect()
}

/// `besov_p` of the Busemann boundary function against the closed-form
/// cocycle norm.
pub fn bridge_identity(rank: Rank, g: &Word, p: u32) -> Result<(ExactScalar, ExactScalar)> {
    let ball = CayleyBall::new(rank, g.len() + 1);
    ball.require_radius(g.len())?;
    let f = boundary_extension(&busemann_function(g, rank), &ball, g.len())?;
    Ok((besov_seminorm_p(&f, p), cocycle_lp_norm_p(rank, g, p)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{integrate_nu, PairFunction};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn r2() -> Rank {
        Rank::new(2).unwrap()
    }

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    /// Edge-by-edge sum over an explicitly enumerated ball.
    fn ep_by_enumeration(phi: &GroupFunction, ball: &CayleyBall, p: u32) -> ExactScalar {
        ball.vertices()
            .iter()
            .filter(|y| !y.is_identity())
            .map(|y| (phi.value(&y.parent().unwrap()) - phi.value(y)).abs().powi(p))
            .sum()
    }

    /// Besov seminorm through the double-boundary integral of the dense
    /// difference table at the function's depth.
    fn besov_by_integration(f: &BoundaryFunction, p: u32) -> ExactScalar {
        let r = f.rank();
        let depth = f.depth();
        let sphere = r.sphere(depth);
        let vals: Vec<ExactScalar> = sphere
            .iter()
            .map(|x| f.cells().iter().find(|(c, _)| c.is_prefix_of(x)).unwrap().1.clone())
            .collect();
        let table = vals
            .iter()
            .flat_map(|a| vals.iter().map(move |b| (a - b).abs().powi(p)))
            .collect();
        integrate_nu(&PairFunction::from_table(r, depth, table).unwrap()).unwrap()
    }

    #[test]
    fn ball_sizes() {
        let r = r2();
        for radius in 0..5 {
            let b = CayleyBall::new(r, radius);
            assert_eq!(b.vertex_count(), BigInt::from(b.vertices().len()));
        }
        assert!(CayleyBall::new(r, 3).require_radius(3).is_err());
        assert!(CayleyBall::new(r, 4).require_radius(3).is_ok());
    }

    #[test]
    fn ep_examples() {
        for n in 2..5 {
            let r = Rank::new(n).unwrap();
            let ball = CayleyBall::new(r, 3);
            assert!(ep_seminorm_p(&GroupFunction::constant(r, ExactScalar::integer(7)), &ball, 2).is_zero());
            let ind = GroupFunction::identity_indicator(r);
            assert_eq!(ep_seminorm_p(&ind, &ball, 2), ExactScalar::integer(2 * n as i64));
            assert_eq!(ep_by_enumeration(&ind, &ball, 2), ExactScalar::integer(2 * n as i64));
        }
        let r = r2();
        let g = w("a1.a2.A1");
        let ball = CayleyBall::new(r, 4);
        let phi = busemann_function(&g, r);
        assert_eq!(ep_seminorm_p(&phi, &ball, 3), ExactScalar::integer(3));
        assert_eq!(ep_by_enumeration(&phi, &ball, 3), ExactScalar::integer(3));
    }

    #[test]
    fn busemann_values_and_cocycle() {
        let r = r2();
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..30 {
            let g = r.random_word(rng.random_range(0..5), &mut rng);
            let h = r.random_word(rng.random_range(0..5), &mut rng);
            let phi_g = busemann_function(&g, r);
            let phi_h = busemann_function(&h, r);
            let phi_gh = busemann_function(&g.multiply(&h), r);
            // (gh, x) - (h, g^{-1} x) - (g, x) = (|gh| - |g| - |h|) / 2
            let c = ExactScalar::ratio(g.multiply(&h).len() as i64 - g.len() as i64 - h.len() as i64, 2);
            for _ in 0..50 {
                let x = r.random_word(rng.random_range(0..10), &mut rng);
                assert_eq!(phi_g.value(&x), &ExactScalar::integer(g.gromov_product(&x) as i64));
                let lhs = phi_gh.value(&x) - &(phi_h.value(&g.inverse().multiply(&x)) + phi_g.value(&x));
                assert_eq!(lhs, c, "g={g} h={h} x={x}");
            }
        }
    }

    #[test]
    fn extension_examples() {
        let r = r2();
        let ball = CayleyBall::new(r, 5);
        let c = boundary_extension(&GroupFunction::constant(r, ExactScalar::integer(2)), &ball, 3).unwrap();
        assert_eq!(c.cells().len(), 1);
        let z = boundary_extension(&GroupFunction::identity_indicator(r), &ball, 2).unwrap();
        assert!(z.cells().values().all(ExactScalar::is_zero));
        let g = w("a1.a1.a2");
        let f = boundary_extension(&busemann_function(&g, r), &ball, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..100 {
            let xi = r.random_boundary(4, 3, &mut rng);
            assert_eq!(
                f.evaluate(&xi),
                &ExactScalar::integer(xi.gromov_product_word(&g) as i64)
            );
        }
        assert!(matches!(
            boundary_extension(&busemann_function(&g, r), &ball, 2),
            Err(Error::ExtensionUndefined { .. })
        ));
    }

    #[test]
    fn besov_examples() {
        let r = r2();
        assert!(besov_seminorm_p(&BoundaryFunction::constant(r, ExactScalar::one()), 2).is_zero());
        // indicator of Omega_a1: 2 * sum over b != a1 of nu(a1, b) = 2 * 3/16
        let ind = BoundaryFunction::from_table(
            r,
            1,
            vec![
                ExactScalar::one(),
                ExactScalar::zero(),
                ExactScalar::zero(),
                ExactScalar::zero(),
            ],
        )
        .unwrap();
        assert_eq!(besov_seminorm_p(&ind, 2), ExactScalar::ratio(3, 8));
        assert_eq!(besov_by_integration(&ind, 2), ExactScalar::ratio(3, 8));
    }

    #[test]
    fn besov_matches_integration_oracle() {
        let r = r2();
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        for _ in 0..20 {
            let depth = rng.random_range(1..4);
            let n = r.sphere(depth).len();
            let vals = (0..n).map(|_| ExactScalar::integer(rng.random_range(-3..4))).collect();
            let f = BoundaryFunction::from_table(r, depth, vals).unwrap();
            for p in 1..4 {
                assert_eq!(besov_seminorm_p(&f, p), besov_by_integration(&f, p));
            }
        }
    }

    #[test]
    fn besov_is_invariant() {
        let r = r2();
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        for _ in 0..20 {
            let n = r.sphere(2).len();
            let vals = (0..n).map(|_| ExactScalar::integer(rng.random_range(-3..4))).collect();
            let f = BoundaryFunction::from_table(r, 2, vals).unwrap();
            let g = r.random_word(rng.random_range(0..6), &mut rng);
            assert_eq!(besov_seminorm_p(&f.pullback(&g), 2), besov_seminorm_p(&f, 2));
        }
    }

    #[test]
    fn bridge_to_cocycle_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(45);
        for n in 2..4 {
            let r = Rank::new(n).unwrap();
            for len in 0..12 {
                let g = r.random_word(len, &mut rng);
                for p in 1..4 {
                    let (besov, norm) = bridge_identity(r, &g, p).unwrap();
                    assert_eq!(besov, norm, "g={g} p={p}");
                }
            }
        }
    }

    #[test]
    fn properness_rows() {
        let r = r2();
        let gs = vec![Word::identity(), w("a1"), w("a1.a2.a2.A1")];
        let rows = properness_table(r, &gs, 2).unwrap();
        assert!(rows[0].ep_p.is_zero() && rows[0].besov_p.is_zero());
        assert_eq!(rows[1].besov_p, ExactScalar::ratio(3, 8));
        for row in &rows {
            assert_eq!(row.ep_p, ExactScalar::integer(row.length as i64));
            assert!(row.within_brackets());
        }
        assert!(properness_table(r, &gs, 1).is_err());
    }

    #[test]
    fn json_ingestion() {
        let r = r2();
        let phi = GroupFunction::from_json(r, r#"{"": "1/2", "a1": 3, "a1.a2": "-1/3"}"#).unwrap();
        assert_eq!(phi.value(&w("a1.a2.a2")), &ExactScalar::ratio(-1, 3));
        assert_eq!(phi.value(&w("a2")), &ExactScalar::ratio(1, 2));
        assert!(GroupFunction::from_json(r, r#"{"a1": 3}"#).is_err());
        assert!(GroupFunction::from_json(r, r#"{"": 0.5}"#).is_err());
    }
}
