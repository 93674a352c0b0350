//! Locally constant functions on `Omega` and `Omega x Omega`.
//!
//! Functions are stored sparsely as cylinder cells. A dense depth-`N` table
//! has `(q+1) q^{N-1}` entries per axis, which is far too many once `g` has
//! been applied, while the image of a cylinder under `g` is always one
//! cylinder or the complement of one.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::group::{image_of_cylinder, BoundaryPoint, CylinderSet, Rank, Word};
use crate::scalar::ExactScalar;

use super::nu_of_rectangle;

/// A function on `Omega` constant on each cell of a finite cylinder
/// partition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundaryFunction {
    rank: Rank,
    cells: BTreeMap<Word, ExactScalar>,
}

impl BoundaryFunction {
    /// `cells` must be pairwise disjoint cylinders covering `Omega`.
    pub fn new(rank: Rank, cells: BTreeMap<Word, ExactScalar>) -> Result<Self> {
        let words: Vec<&Word> = cells.keys().collect();
        for w in &words {
            if !rank.contains(w) {
                return Err(Error::MalformedCells(format!("{w} is not a rank-{} word", rank.n())));
            }
        }
        // In word order a nested pair is always adjacent to some witness.
        for pair in words.windows(2) {
            if pair[0].is_prefix_of(pair[1]) {
                return Err(Error::MalformedCells(format!(
                    "cells {} and {} overlap",
                    pair[0], pair[1]
                )));
            }
        }
        if !CylinderSet::from_cylinders(rank, cells.keys().cloned()).is_full() {
            return Err(Error::MalformedCells("cells do not cover the boundary".into()));
        }
        if cells.values().any(ExactScalar::is_infinite) {
            return Err(Error::MalformedCells("values must be finite".into()));
        }
        Ok(BoundaryFunction { rank, cells })
    }

    pub fn constant(rank: Rank, value: ExactScalar) -> Self {
        BoundaryFunction {
            rank,
            cells: BTreeMap::from([(Word::identity(), value)]),
        }
    }

    /// Dense depth-`depth` table, values listed in sphere order.
    pub fn from_table(rank: Rank, depth: usize, values: Vec<ExactScalar>) -> Result<Self> {
        let sphere = rank.sphere(depth);
        if sphere.len() != values.len() {
            return Err(Error::MalformedCells(format!(
                "depth {depth} needs {} values, got {}",
                sphere.len(),
                values.len()
            )));
        }
        BoundaryFunction::new(rank, sphere.into_iter().zip(values).collect())
    }

    pub fn rank(&self) -> Rank {
        self.rank
    }

    pub fn cells(&self) -> &BTreeMap<Word, ExactScalar> {
        &self.cells
    }

    pub fn depth(&self) -> usize {
        self.cells.keys().map(Word::len).max().unwrap_or(0)
    }

    pub fn evaluate(&self, xi: &BoundaryPoint) -> &ExactScalar {
        (0..=self.depth())
            .find_map(|k| self.cells.get(&xi.prefix(k)))
            .expect("cells cover the boundary")
    }

    /// `(g.f)(xi) = f(g^{-1} xi)`.
    pub fn pullback(&self, g: &Word) -> BoundaryFunction {
        let mut cells = BTreeMap::new();
        for (x, v) in &self.cells {
            for c in image_of_cylinder(self.rank, g, x).cells() {
                cells.insert(c.clone(), v.clone());
            }
        }
        BoundaryFunction { rank: self.rank, cells }
    }
}

/// A function on `Omega x Omega` that takes a constant value on each of a
/// finite set of disjoint rectangles `Omega_x x Omega_y` and vanishes
/// elsewhere.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairFunction {
    rank: Rank,
    cells: BTreeMap<(Word, Word), ExactScalar>,
}

impl PairFunction {
    pub fn zero(rank: Rank) -> Self {
        PairFunction {
            rank,
            cells: BTreeMap::new(),
        }
    }

    /// Rectangles must be pairwise disjoint; zero values are dropped.
    pub fn new(rank: Rank, cells: BTreeMap<(Word, Word), ExactScalar>) -> Result<Self> {
        for (x, y) in cells.keys() {
            if !rank.contains(x) || !rank.contains(y) {
                return Err(Error::MalformedCells(format!(
                    "({x}, {y}) is not a rank-{} cell",
                    rank.n()
                )));
            }
        }
        let keys: Vec<&(Word, Word)> = cells.keys().collect();
        for (i, (x1, y1)) in keys.iter().enumerate() {
            for (x2, y2) in &keys[i + 1..] {
                if x1.nested_with(x2) && y1.nested_with(y2) {
                    return Err(Error::MalformedCells(format!(
                        "rectangles ({x1}, {y1}) and ({x2}, {y2}) overlap"
                    )));
                }
            }
        }
        if cells.values().any(ExactScalar::is_infinite) {
            return Err(Error::MalformedCells("values must be finite".into()));
        }
        Ok(PairFunction {
            rank,
            cells: cells.into_iter().filter(|(_, v)| !v.is_zero()).collect(),
        })
    }

    /// Indicator of a single rectangle.
    pub fn indicator(rank: Rank, x: Word, y: Word) -> Self {
        PairFunction {
            rank,
            cells: BTreeMap::from([((x, y), ExactScalar::one())]),
        }
    }

    /// Dense depth-`depth` table in row-major sphere order: the value for
    /// `(sphere[i], sphere[j])` sits at index `i * len + j`.
    pub fn from_table(rank: Rank, depth: usize, values: Vec<ExactScalar>) -> Result<Self> {
        let sphere = rank.sphere(depth);
        let n = sphere.len();
        if values.len() != n * n {
            return Err(Error::MalformedCells(format!(
                "depth {depth} needs {} values, got {}",
                n * n,
                values.len()
            )));
        }
        if values.iter().any(ExactScalar::is_infinite) {
            return Err(Error::MalformedCells("values must be finite".into()));
        }
        let cells = values
            .into_iter()
            .enumerate()
            .filter(|(_, v)| !v.is_zero())
            .map(|(k, v)| ((sphere[k / n].clone(), sphere[k % n].clone()), v))
            .collect();
        Ok(PairFunction { rank, cells })
    }

    pub fn rank(&self) -> Rank {
        self.rank
    }

    /// The nonzero cells.
    pub fn cells(&self) -> &BTreeMap<(Word, Word), ExactScalar> {
        &self.cells
    }

    pub fn evaluate(&self, xi: &BoundaryPoint, omega: &BoundaryPoint) -> ExactScalar {
        self.cells
            .iter()
            .find(|((x, y), _)| xi.starts_with(x) && omega.starts_with(y))
            .map(|(_, v)| v.clone())
            .unwrap_or_else(ExactScalar::zero)
    }

    /// `(g.F)(xi, omega) = F(g^{-1} xi, g^{-1} omega)`. The preimage of
    /// `Omega_x x Omega_y` under `g^{-1}` is `g Omega_x x g Omega_y`, a
    /// product of two cylinder sets.
    pub fn pullback(&self, g: &Word) -> PairFunction {
        let mut cells = BTreeMap::new();
        for ((x, y), v) in &self.cells {
            let gx = image_of_cylinder(self.rank, g, x);
            let gy = image_of_cylinder(self.rank, g, y);
            for a in gx.cells() {
                for b in gy.cells() {
                    cells.insert((a.clone(), b.clone()), v.clone());
                }
            }
        }
        PairFunction { rank: self.rank, cells }
    }
}

/// `integral of F d nu`, summed cell by cell. Nested rectangles have
/// infinite measure, so `F` must vanish there.
pub fn integrate_nu(f: &PairFunction) -> Result<ExactScalar> {
    let mut total = ExactScalar::zero();
    for ((x, y), v) in &f.cells {
        if x.nested_with(y) {
            return Err(Error::NotIntegrable {
                x: x.to_string(),
                y: y.to_string(),
                value: v.to_string(),
            });
        }
        total += &(v * &nu_of_rectangle(f.rank, x, y));
    }
    Ok(total)
}
