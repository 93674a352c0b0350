//! Reduced words in the free group `F_n`, its boundary and cylinder sets.

mod boundary;
mod cylinder;

pub use boundary::{BoundaryPoint, GromovProduct, Point};
pub use cylinder::{image_of_cylinder, CylinderSet};

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};

/// Number of free generators. The tree is `2n`-regular and `q = 2n - 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Rank {
    n: usize,
}

impl Rank {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidRank(n));
        }
        Ok(Rank { n })
    }

    pub fn n(self) -> usize {
        self.n
    }

    /// Branching number `q = 2n - 1` of the tree below any non-root vertex.
    pub fn q(self) -> u64 {
        2 * self.n as u64 - 1
    }

    /// All `2n` letters, in alphabet order `a1 < A1 < a2 < A2 < ...`.
    pub fn alphabet(self) -> impl Iterator<Item = Letter> {
        (0..2 * self.n as u16).map(Letter)
    }

    pub fn contains_letter(self, l: Letter) -> bool {
        (l.generator() as usize) < self.n
    }

    pub fn contains(self, w: &Word) -> bool {
        w.letters().iter().all(|&l| self.contains_letter(l))
    }

    fn check(self, w: &Word) -> Result<()> {
        match w.letters().iter().find(|&&l| !self.contains_letter(l)) {
            Some(l) => Err(Error::LetterOutOfRank {
                letter: l.to_string(),
                rank: self.n,
            }),
            None => Ok(()),
        }
    }

    /// Freely reduces a raw letter sequence, rejecting letters outside the rank.
    pub fn reduce(self, letters: &[Letter]) -> Result<Word> {
        let w = Word::reduce(letters.iter().copied());
        for &l in letters {
            if !self.contains_letter(l) {
                return Err(Error::LetterOutOfRank {
                    letter: l.to_string(),
                    rank: self.n,
                });
            }
        }
        Ok(w)
    }

    pub fn parse_word(self, s: &str) -> Result<Word> {
        let w: Word = s.parse()?;
        self.check(&w)?;
        Ok(w)
    }

    pub fn parse_boundary(self, s: &str) -> Result<BoundaryPoint> {
        let p: BoundaryPoint = s.parse()?;
        self.check(p.preperiod())?;
        self.check(p.period())?;
        Ok(p)
    }

    /// Number of reduced words of length `len`: `(q+1) q^(len-1)`, or 1.
    pub fn sphere_size(self, len: usize) -> u64 {
        if len == 0 {
            1
        } else {
            (self.q() + 1) * self.q().pow(len as u32 - 1)
        }
    }

    /// Number of reduced words of length at most `radius`.
    pub fn ball_size(self, radius: usize) -> u64 {
        (0..=radius).map(|r| self.sphere_size(r)).sum()
    }

    /// Letters that may follow `w` without cancellation.
    pub fn successors(self, w: &Word) -> impl Iterator<Item = Letter> + '_ {
        let last = w.last();
        self.alphabet().filter(move |&l| Some(l.inverse()) != last)
    }

    /// The one-letter extensions of `w`, in alphabet order.
    pub fn children(self, w: &Word) -> Vec<Word> {
        self.successors(w)
            .map(|l| {
                let mut c = w.clone();
                c.0.push(l);
                c
            })
            .collect()
    }

    /// All reduced words of length `len` that start with `prefix`, in
    /// lexicographic order. Empty if `prefix` is longer than `len`.
    pub fn extensions(self, prefix: &Word, len: usize) -> Vec<Word> {
        let mut out = Vec::new();
        if prefix.len() > len {
            return out;
        }
        let mut buf = prefix.clone();
        self.extend_into(&mut buf, len, &mut out);
        out
    }

    fn extend_into(self, buf: &mut Word, len: usize, out: &mut Vec<Word>) {
        if buf.len() == len {
            out.push(buf.clone());
            return;
        }
        let last = buf.last();
        for l in self.alphabet() {
            if Some(l.inverse()) == last {
                continue;
            }
            buf.0.push(l);
            self.extend_into(buf, len, out);
            buf.0.pop();
        }
    }

    /// All reduced words of length exactly `len`, lexicographically.
    pub fn sphere(self, len: usize) -> Vec<Word> {
        self.extensions(&Word::identity(), len)
    }

    /// A uniformly random reduced word of length `len`: a non-backtracking
    /// walk with uniform first step and uniform subsequent steps.
    pub fn random_word<R: Rng + ?Sized>(self, len: usize, rng: &mut R) -> Word {
        let mut letters = Vec::with_capacity(len);
        for i in 0..len {
            if i == 0 {
                letters.push(Letter(rng.random_range(0..2 * self.n as u16)));
            } else {
                let prev: Letter = letters[i - 1];
                let mut k = rng.random_range(0..2 * self.n as u16 - 1);
                if k >= prev.inverse().0 {
                    k += 1;
                }
                letters.push(Letter(k));
            }
        }
        Word(letters)
    }

    /// A random eventually periodic boundary point with preperiod length at
    /// most `max_pre` and period length in `1..=max_period`.
    pub fn random_boundary<R: Rng + ?Sized>(self, max_pre: usize, max_period: usize, rng: &mut R) -> BoundaryPoint {
        loop {
            let pre = self.random_word(rng.random_range(0..=max_pre), rng);
            let plen = rng.random_range(1..=max_period.max(1));
            let period = self.random_word(plen, rng);
            if let Ok(p) = BoundaryPoint::new(&pre, &period) {
                return p;
            }
        }
    }
}

/// One of `a_i` or `a_i^{-1}`, stored as `2i + inverse`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter(u16);

impl Letter {
    /// `generator` is zero-based: generator 0 prints as `a1`.
    pub fn new(generator: u16, inverse: bool) -> Self {
        Letter(2 * generator + inverse as u16)
    }

    pub fn generator(self) -> u16 {
        self.0 / 2
    }

    pub fn is_inverse(self) -> bool {
        self.0 & 1 == 1
    }

    pub fn inverse(self) -> Letter {
        Letter(self.0 ^ 1)
    }

    pub fn code(self) -> u16 {
        self.0
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = if self.is_inverse() { 'A' } else { 'a' };
        write!(f, "{}{}", c, self.generator() + 1)
    }
}

impl FromStr for Letter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |reason: &str| Error::Parse {
            what: "letter",
            input: s.to_string(),
            reason: reason.to_string(),
        };
        let mut chars = s.chars();
        let inverse = match chars.next() {
            Some('a') => false,
            Some('A') => true,
            _ => return Err(bad("expected a<k> or A<k>")),
        };
        let idx: u16 = chars.as_str().parse().map_err(|_| bad("bad generator index"))?;
        if idx == 0 || idx > u16::MAX / 2 {
            return Err(bad("generator index out of range"));
        }
        Ok(Letter::new(idx - 1, inverse))
    }
}

/// A freely reduced word; the empty word is the identity.
///
/// Ordering is lexicographic on letters, so all words with a given prefix
/// form a contiguous range.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn identity() -> Self {
        Word(Vec::new())
    }

    /// Free reduction of an arbitrary letter sequence.
    pub fn reduce<I: IntoIterator<Item = Letter>>(letters: I) -> Self {
        let mut out: Vec<Letter> = Vec::new();
        for l in letters {
            if out.last() == Some(&l.inverse()) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Word(out)
    }

    pub fn letter(l: Letter) -> Self {
        Word(vec![l])
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    /// Word length, i.e. distance to the identity in the Cayley tree.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn last(&self) -> Option<Letter> {
        self.0.last().copied()
    }

    pub fn first(&self) -> Option<Letter> {
        self.0.first().copied()
    }

    pub fn prefix(&self, n: usize) -> Word {
        Word(self.0[..n.min(self.len())].to_vec())
    }

    /// The neighbour one step closer to the identity.
    pub fn parent(&self) -> Option<Word> {
        if self.is_identity() {
            None
        } else {
            Some(self.prefix(self.len() - 1))
        }
    }

    pub fn is_prefix_of(&self, other: &Word) -> bool {
        other.0.starts_with(&self.0)
    }

    /// True if one of the two words is a prefix of the other, i.e. the
    /// cylinders they label intersect.
    pub fn nested_with(&self, other: &Word) -> bool {
        self.is_prefix_of(other) || other.is_prefix_of(self)
    }

    pub fn multiply(&self, other: &Word) -> Word {
        let mut k = 0;
        while k < self.len().min(other.len()) && self.0[self.len() - 1 - k] == other.0[k].inverse() {
            k += 1;
        }
        let mut out = Vec::with_capacity(self.len() + other.len() - 2 * k);
        out.extend_from_slice(&self.0[..self.len() - k]);
        out.extend_from_slice(&other.0[k..]);
        Word(out)
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|l| l.inverse()).collect())
    }

    /// Gromov product based at the identity: the length of the longest
    /// common prefix.
    pub fn gromov_product(&self, other: &Word) -> usize {
        self.0.iter().zip(&other.0).take_while(|(a, b)| a == b).count()
    }

    /// Word-metric distance `|g^{-1} h|`.
    pub fn distance(&self, other: &Word) -> usize {
        self.inverse().multiply(other).len()
    }

    /// Appends a letter, returning `None` if it would cancel.
    pub fn extended(&self, l: Letter) -> Option<Word> {
        if self.last() == Some(l.inverse()) {
            return None;
        }
        let mut w = self.clone();
        w.0.push(l);
        Some(w)
    }

    pub(crate) fn from_reduced_unchecked(letters: Vec<Letter>) -> Word {
        debug_assert!(letters.windows(2).all(|p| p[1] != p[0].inverse()));
        Word(letters)
    }

    /// True if the word is reduced when read cyclically.
    pub fn is_cyclically_reduced(&self) -> bool {
        match (self.first(), self.last()) {
            (Some(a), Some(b)) => self.len() == 1 || a != b.inverse(),
            _ => true,
        }
    }
}

impl fmt::Display for Word {
    /// Dot-separated tokens; the identity prints as the empty string.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

impl FromStr for Word {
    type Err = Error;

    /// Parses dot-separated tokens and freely reduces. The empty string and
    /// `e` denote the identity.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.is_empty() || t == "e" {
            return Ok(Word::identity());
        }
        let letters = t
            .split('.')
            .map(|tok| tok.trim().parse::<Letter>())
            .collect::<Result<Vec<_>>>()?;
        Ok(Word::reduce(letters))
    }
}
