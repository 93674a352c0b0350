use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::{BoundaryPoint, Rank, Word};

/// A finite union of boundary cylinders `Omega_x`, kept in normal form: the
/// set of maximal cylinders it contains. The cells are pairwise disjoint and
/// no complete family of siblings is present, so two sets are equal exactly
/// when their cell lists are.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CylinderSet {
    rank: Rank,
    cells: BTreeSet<Word>,
}

fn has_descendant(set: &BTreeSet<Word>, w: &Word) -> bool {
    set.range(w.clone()..).next().is_some_and(|x| w.is_prefix_of(x))
}

fn has_ancestor(set: &BTreeSet<Word>, w: &Word) -> bool {
    (0..=w.len()).any(|k| set.contains(&w.prefix(k)))
}

impl CylinderSet {
    pub fn empty(rank: Rank) -> Self {
        CylinderSet {
            rank,
            cells: BTreeSet::new(),
        }
    }

    pub fn full(rank: Rank) -> Self {
        CylinderSet::cylinder(rank, Word::identity())
    }

    pub fn cylinder(rank: Rank, x: Word) -> Self {
        CylinderSet {
            rank,
            cells: BTreeSet::from([x]),
        }
    }

    /// Union of arbitrary (possibly overlapping) cylinders.
    pub fn from_cylinders<I: IntoIterator<Item = Word>>(rank: Rank, cylinders: I) -> Self {
        let mut raw: Vec<Word> = cylinders.into_iter().collect();
        raw.sort_by_key(|w| w.len());
        let mut cells = BTreeSet::new();
        for w in raw {
            if !has_ancestor(&cells, &w) {
                cells.insert(w);
            }
        }
        let mut s = CylinderSet { rank, cells };
        s.merge_siblings();
        s
    }

    fn merge_siblings(&mut self) {
        let max_len = self.cells.iter().map(Word::len).max().unwrap_or(0);
        for len in (1..=max_len).rev() {
            let mut groups: BTreeMap<Word, usize> = BTreeMap::new();
            for w in self.cells.iter().filter(|w| w.len() == len) {
                *groups.entry(w.parent().unwrap()).or_default() += 1;
            }
            for (parent, count) in groups {
                if count == self.rank.children(&parent).len() {
                    for c in self.rank.children(&parent) {
                        self.cells.remove(&c);
                    }
                    self.cells.insert(parent);
                }
            }
        }
    }

    pub fn rank(&self) -> Rank {
        self.rank
    }

    /// The disjoint maximal cylinders, in word order.
    pub fn cells(&self) -> impl Iterator<Item = &Word> {
        self.cells.iter()
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.cells.len() == 1 && self.cells.contains(&Word::identity())
    }

    pub fn contains(&self, xi: &BoundaryPoint) -> bool {
        let depth = self.cells.iter().map(Word::len).max().unwrap_or(0);
        (0..=depth).any(|k| self.cells.contains(&xi.prefix(k)))
    }

    /// True if `Omega_w` is a subset of this set.
    pub fn contains_cylinder(&self, w: &Word) -> bool {
        has_ancestor(&self.cells, w)
    }

    pub fn complement(&self) -> CylinderSet {
        let mut out = Vec::new();
        self.complement_below(&Word::identity(), &mut out);
        CylinderSet::from_cylinders(self.rank, out)
    }

    fn complement_below(&self, w: &Word, out: &mut Vec<Word>) {
        if self.cells.contains(w) {
            return;
        }
        if !has_descendant(&self.cells, w) {
            out.push(w.clone());
            return;
        }
        for c in self.rank.children(w) {
            self.complement_below(&c, out);
        }
    }

    pub fn union(&self, other: &CylinderSet) -> CylinderSet {
        CylinderSet::from_cylinders(self.rank, self.cells.iter().chain(&other.cells).cloned())
    }

    pub fn intersection(&self, other: &CylinderSet) -> CylinderSet {
        let mut out = Vec::new();
        for a in &self.cells {
            for b in &other.cells {
                if a.is_prefix_of(b) {
                    out.push(b.clone());
                } else if b.is_prefix_of(a) {
                    out.push(a.clone());
                }
            }
        }
        CylinderSet::from_cylinders(self.rank, out)
    }

    pub fn difference(&self, other: &CylinderSet) -> CylinderSet {
        self.intersection(&other.complement())
    }

    /// The set `g . A`.
    pub fn image(&self, g: &Word) -> CylinderSet {
        let mut out = Vec::new();
        for x in &self.cells {
            out.extend(image_of_cylinder(self.rank, g, x).cells);
        }
        CylinderSet::from_cylinders(self.rank, out)
    }
}

/// The set `g . Omega_x` in normal form.
///
/// If reducing `g x` leaves at least one letter of `x`, the image is the
/// single cylinder `Omega_{gx}`. If `g` ends with `x^{-1}`, writing
/// `g = g1 x^{-1}` and `s` for the last letter of `x`, the image is
/// `g1 . (Omega minus Omega_{s^{-1}})`, which is the complement of
/// `Omega_{g1 s^{-1}}`, and `g1 s^{-1}` is the prefix of `g` of length
/// `|g| - |x| + 1`.
pub fn image_of_cylinder(rank: Rank, g: &Word, x: &Word) -> CylinderSet {
    if x.is_identity() {
        return CylinderSet::full(rank);
    }
    let gx = g.multiply(x);
    let cancelled = (g.len() + x.len() - gx.len()) / 2;
    if cancelled < x.len() {
        CylinderSet::cylinder(rank, gx)
    } else {
        let z = g.prefix(g.len() - x.len() + 1);
        CylinderSet::cylinder(rank, z).complement()
    }
}

impl fmt::Display for CylinderSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, w) in self.cells.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            if w.is_identity() {
                f.write_str("Omega")?;
            } else {
                write!(f, "Omega_{w}")?;
            }
        }
        f.write_str("}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    fn r2() -> Rank {
        Rank::new(2).unwrap()
    }

    /// Image by refinement: push every deep enough subcylinder of `Omega_x`
    /// through `g` one at a time and normalize the union.
    fn image_by_refinement(rank: Rank, g: &Word, x: &Word) -> CylinderSet {
        let depth = x.len().max(g.len() + 1);
        let images = rank.extensions(x, depth).into_iter().map(|y| g.multiply(&y));
        CylinderSet::from_cylinders(rank, images)
    }

    #[test]
    fn image_examples() {
        let r = r2();
        assert_eq!(
            image_of_cylinder(r, &w("a1"), &w("a2")),
            CylinderSet::cylinder(r, w("a1.a2"))
        );
        assert_eq!(
            image_of_cylinder(r, &w("A1"), &w("a1.a2")),
            CylinderSet::cylinder(r, w("a2"))
        );
        let expected = CylinderSet::cylinder(r, w("A1")).complement();
        assert_eq!(image_of_cylinder(r, &w("A1"), &w("a1")), expected);
        assert_eq!(image_by_refinement(r, &w("A1"), &w("a1")), expected);
        assert_eq!(expected.to_string(), "{Omega_a1, Omega_a2, Omega_A2}");
    }

    #[test]
    fn image_matches_refinement() {
        let r = r2();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..300 {
            let g = r.random_word(rng.random_range(0..6), &mut rng);
            let x = if rng.random_bool(0.4) && !g.is_identity() {
                // force x to be consumed by cancellation
                g.inverse().prefix(rng.random_range(1..=g.len()))
            } else {
                r.random_word(rng.random_range(0..5), &mut rng)
            };
            assert_eq!(
                image_of_cylinder(r, &g, &x),
                image_by_refinement(r, &g, &x),
                "g={g} x={x}"
            );
        }
    }

    #[test]
    fn image_respects_composition() {
        let r = Rank::new(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..300 {
            let g = r.random_word(rng.random_range(0..5), &mut rng);
            let h = r.random_word(rng.random_range(0..5), &mut rng);
            let x = r.random_word(rng.random_range(0..5), &mut rng);
            let direct = image_of_cylinder(r, &g.multiply(&h), &x);
            let twice = image_of_cylinder(r, &h, &x).image(&g);
            assert_eq!(direct, twice);
        }
    }

    #[test]
    fn boolean_operations() {
        let r = r2();
        let a = CylinderSet::cylinder(r, w("a1"));
        let b = CylinderSet::cylinder(r, w("a1.a2"));
        assert_eq!(a.union(&b), a);
        assert_eq!(a.intersection(&b), b);
        assert!(a.complement().intersection(&a).is_empty());
        assert!(a.complement().union(&a).is_full());
        assert_eq!(a.complement().complement(), a);
        let all_depth_one = CylinderSet::from_cylinders(r, r.sphere(1));
        assert!(all_depth_one.is_full());
        let d = a.difference(&b);
        assert_eq!(d.len(), 2);
        assert!(d.contains_cylinder(&w("a1.a1")));
        assert!(!d.contains_cylinder(&w("a1.a2.a2")));
    }

    #[test]
    fn membership() {
        let r = r2();
        let s = CylinderSet::cylinder(r, w("A1")).complement();
        assert!(s.contains(&"(a1)^inf".parse().unwrap()));
        assert!(!s.contains(&"(A1)^inf".parse().unwrap()));
    }
}
