use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_integer::Integer;

use super::{Letter, Word};
use crate::error::{Error, Result};

/// An eventually periodic infinite reduced word `preperiod . period^inf`.
///
/// Values are always canonical: the period is primitive and equal to its
/// lexicographically least rotation, and the preperiod is the shortest one
/// compatible with that period. Structural equality is therefore equality
/// of boundary points.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BoundaryPoint {
    pre: Word,
    period: Word,
}

/// Gromov product value, possibly infinite (only for a point with itself).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GromovProduct {
    Finite(usize),
    Infinite,
}

impl GromovProduct {
    pub fn finite(self) -> Option<usize> {
        match self {
            GromovProduct::Finite(k) => Some(k),
            GromovProduct::Infinite => None,
        }
    }
}

impl PartialOrd for GromovProduct {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for GromovProduct {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (GromovProduct::Finite(a), GromovProduct::Finite(b)) => a.cmp(b),
            (GromovProduct::Finite(_), GromovProduct::Infinite) => Ordering::Less,
            (GromovProduct::Infinite, GromovProduct::Finite(_)) => Ordering::Greater,
            (GromovProduct::Infinite, GromovProduct::Infinite) => Ordering::Equal,
        }
    }
}

impl fmt::Display for GromovProduct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GromovProduct::Finite(k) => write!(f, "{k}"),
            GromovProduct::Infinite => f.write_str("inf"),
        }
    }
}

fn rotate_left(v: &mut [Letter], k: usize) {
    if !v.is_empty() {
        let k = k % v.len();
        v.rotate_left(k);
    }
}

fn least_rotation(v: &[Letter]) -> usize {
    let n = v.len();
    (0..n)
        .min_by(|&a, &b| {
            (0..n)
                .map(|i| v[(a + i) % n].cmp(&v[(b + i) % n]))
                .find(|o| *o != Ordering::Equal)
                .unwrap_or(Ordering::Equal)
        })
        .unwrap_or(0)
}

fn primitive_root_len(v: &[Letter]) -> usize {
    let n = v.len();
    (1..=n)
        .find(|&d| n % d == 0 && (d..n).all(|i| v[i] == v[i - d]))
        .unwrap_or(n)
}

impl BoundaryPoint {
    /// Canonical form of the infinite word `preperiod . period^inf`. Any
    /// reduced words are accepted; cancellation between them, and inside the
    /// period read cyclically, is resolved here.
    pub fn new(preperiod: &Word, period: &Word) -> Result<Self> {
        if period.is_identity() {
            return Err(Error::TrivialPeriod);
        }
        // period = w c w^{-1} with c cyclically reduced, so period^inf = w c^inf
        let v = period.letters();
        let mut k = 0;
        while v.len() - 2 * k > 1 && v[k] == v[v.len() - 1 - k].inverse() {
            k += 1;
        }
        let conj = Word::from_reduced_unchecked(v[..k].to_vec());
        let mut cycle = v[k..v.len() - k].to_vec();
        let mut pre = preperiod.multiply(&conj).letters().to_vec();

        // cancellation across the junction consumes the preperiod letter by
        // letter, rotating the cycle each time
        while let Some(&last) = pre.last() {
            if last != cycle[0].inverse() {
                break;
            }
            pre.pop();
            rotate_left(&mut cycle, 1);
        }

        cycle.truncate(primitive_root_len(&cycle));

        // absorb preperiod letters that already repeat the cycle
        while let Some(&last) = pre.last() {
            if last != *cycle.last().unwrap() {
                break;
            }
            pre.pop();
            cycle.rotate_right(1);
        }

        let r = least_rotation(&cycle);
        pre.extend_from_slice(&cycle[..r]);
        rotate_left(&mut cycle, r);

        Ok(BoundaryPoint {
            pre: Word::from_reduced_unchecked(pre),
            period: Word::from_reduced_unchecked(cycle),
        })
    }

    /// The point `period^inf`.
    pub fn periodic(period: &Word) -> Result<Self> {
        BoundaryPoint::new(&Word::identity(), period)
    }

    pub fn preperiod(&self) -> &Word {
        &self.pre
    }

    pub fn period(&self) -> &Word {
        &self.period
    }

    pub fn letter_at(&self, i: usize) -> Letter {
        let pre = self.pre.letters();
        if i < pre.len() {
            pre[i]
        } else {
            let p = self.period.letters();
            p[(i - pre.len()) % p.len()]
        }
    }

    /// The first `n` letters, i.e. the label of the depth-`n` cylinder
    /// containing this point.
    pub fn prefix(&self, n: usize) -> Word {
        Word::from_reduced_unchecked((0..n).map(|i| self.letter_at(i)).collect())
    }

    pub fn starts_with(&self, w: &Word) -> bool {
        w.letters().iter().enumerate().all(|(i, &l)| self.letter_at(i) == l)
    }

    /// Index strictly beyond which two distinct canonical points cannot
    /// agree.
    fn scan_bound(&self, other: &BoundaryPoint) -> usize {
        let (p1, p2) = (self.period.len(), other.period.len());
        self.pre.len().max(other.pre.len()) + p1.lcm(&p2) + p1.max(p2)
    }

    pub fn gromov_product(&self, other: &BoundaryPoint) -> GromovProduct {
        if self == other {
            return GromovProduct::Infinite;
        }
        let bound = self.scan_bound(other);
        match (0..bound).find(|&i| self.letter_at(i) != other.letter_at(i)) {
            Some(i) => GromovProduct::Finite(i),
            None => unreachable!("distinct canonical points {self} and {other} agree up to the scan bound {bound}"),
        }
    }

    /// Length of the longest common prefix with a finite word.
    pub fn gromov_product_word(&self, w: &Word) -> usize {
        w.letters()
            .iter()
            .enumerate()
            .take_while(|(i, &l)| self.letter_at(*i) == l)
            .count()
    }

    /// The image `g . self` under the left action of `F_n` on the boundary.
    pub fn act(&self, g: &Word) -> BoundaryPoint {
        BoundaryPoint::new(&g.multiply(&self.pre), &self.period).expect("period of a canonical point is nontrivial")
    }
}

impl fmt::Display for BoundaryPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}|({})^inf", self.pre, self.period)
    }
}

impl FromStr for BoundaryPoint {
    type Err = Error;

    /// Parses `preperiod|(period)^inf`; the `preperiod|` part may be omitted.
    fn from_str(s: &str) -> Result<Self> {
        let bad = |reason: &str| Error::Parse {
            what: "boundary point",
            input: s.to_string(),
            reason: reason.to_string(),
        };
        let t = s.trim();
        let (pre, rest) = match t.split_once('|') {
            Some((a, b)) => (a, b),
            None => ("", t),
        };
        let body = rest
            .trim()
            .strip_prefix('(')
            .and_then(|r| r.strip_suffix(")^inf"))
            .ok_or_else(|| bad("expected (period)^inf"))?;
        let pre: Word = pre.parse()?;
        let period: Word = body.parse()?;
        BoundaryPoint::new(&pre, &period)
    }
}

/// A vertex of the tree or a point of its boundary.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Point {
    Vertex(Word),
    Boundary(BoundaryPoint),
}

impl Point {
    /// Longest common prefix, `+inf` exactly for equal boundary points.
    pub fn gromov_product(&self, other: &Point) -> GromovProduct {
        match (self, other) {
            (Point::Vertex(a), Point::Vertex(b)) => GromovProduct::Finite(a.gromov_product(b)),
            (Point::Vertex(a), Point::Boundary(b)) | (Point::Boundary(b), Point::Vertex(a)) => {
                GromovProduct::Finite(b.gromov_product_word(a))
            }
            (Point::Boundary(a), Point::Boundary(b)) => a.gromov_product(b),
        }
    }
}
