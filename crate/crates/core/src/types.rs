//! Shared domain types: lattice dimension, sites, chirality labels, and the
//! submatrix selectors used by the rank tests.
//!
//! The basis convention is fixed once and for all: on `Z^d` the internal
//! (chirality) space has size `2d`, component `2j` moves one step in the
//! `-e_j` direction and component `2j+1` in the `+e_j` direction, where
//! `e_j` is the unit vector of axis `j`.

use std::fmt;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};

/// Lattice dimension `d >= 1`. The chirality space attached to every site has
/// size `2d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Dimension(usize);

impl Dimension {
    pub fn new(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidDimension(d));
        }
        Ok(Self(d))
    }

    /// Number of lattice axes.
    pub fn get(self) -> usize {
        self.0
    }

    /// Size of the internal space, `2d`.
    pub fn internal_dim(self) -> usize {
        2 * self.0
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

type Coords = SmallVec<[i64; 4]>;

/// A lattice site `x` in `Z^d`.
///
/// Ordering is lexicographic on the coordinate tuple; this is the canonical
/// iteration order used everywhere a deterministic sweep over sites matters.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Position(Coords);

impl Position {
    pub fn new(coords: &[i64]) -> Self {
        Self(SmallVec::from_slice(coords))
    }

    /// The origin of `Z^d`.
    pub fn origin(d: Dimension) -> Self {
        Self(SmallVec::from_elem(0, d.get()))
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    /// Number of coordinates.
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// This site shifted by `delta` along `axis`.
    pub fn shifted(&self, axis: usize, delta: i64) -> Self {
        let mut coords = self.0.clone();
        coords[axis] += delta;
        Self(coords)
    }

    /// L1 distance to another site.
    pub fn l1_distance(&self, other: &Self) -> u64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| a.abs_diff(*b))
            .sum()
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl From<&[i64]> for Position {
    fn from(coords: &[i64]) -> Self {
        Self::new(coords)
    }
}

impl<const N: usize> From<[i64; N]> for Position {
    fn from(coords: [i64; N]) -> Self {
        Self::new(&coords)
    }
}

/// A chirality component index in `[0, 2d)`.
///
/// Index `2j` is paired with movement direction `-e_j`, index `2j+1` with
/// `+e_j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChiralityIndex(usize);

impl ChiralityIndex {
    pub fn new(idx: usize, d: Dimension) -> Result<Self> {
        if idx >= d.internal_dim() {
            return Err(Error::InvalidArgument(format!(
                "chirality index {idx} out of range for 2d = {}",
                d.internal_dim()
            )));
        }
        Ok(Self(idx))
    }

    pub fn index(self) -> usize {
        self.0
    }

    /// The lattice axis this component moves along.
    pub fn axis(self) -> usize {
        self.0 / 2
    }

    /// `-1` for components `2j` (movement `-e_j`), `+1` for `2j+1`.
    pub fn direction_sign(self) -> i64 {
        if self.0.is_multiple_of(2) {
            -1
        } else {
            1
        }
    }
}

/// A bit tuple `l = (l_0, ..., l_{d-1})` in `{0,1}^d` selecting the d x d coin
/// submatrix with entries `c_{2j+l_j, 2k+l_k}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SubmatrixSelector(Vec<u8>);

impl SubmatrixSelector {
    pub fn new(bits: &[u8]) -> Result<Self> {
        if bits.is_empty() {
            return Err(Error::InvalidDimension(0));
        }
        if let Some(b) = bits.iter().find(|&&b| b > 1) {
            return Err(Error::InvalidArgument(format!(
                "selector bits must be 0 or 1, got {b}"
            )));
        }
        Ok(Self(bits.to_vec()))
    }

    /// The all-zero selector, picking the even-index principal submatrix.
    pub fn all_zeros(d: Dimension) -> Self {
        Self(vec![0; d.get()])
    }

    /// The selector with `d/2` zeros followed by `d/2` ones (`d` even only).
    pub fn half_split(d: Dimension) -> Result<Self> {
        let n = d.get();
        if !n.is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!(
                "half-split selector needs an even dimension, got {n}"
            )));
        }
        let mut bits = vec![0; n];
        for b in bits.iter_mut().skip(n / 2) {
            *b = 1;
        }
        Ok(Self(bits))
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// The selected row/column indices `r_j = 2j + l_j`, strictly increasing.
    pub fn indices(&self) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .map(|(j, &b)| 2 * j + b as usize)
            .collect()
    }

    /// All `2^d` selectors in lexicographic order, `(0,...,0)` first.
    pub fn enumerate(d: Dimension) -> impl Iterator<Item = SubmatrixSelector> {
        let n = d.get();
        (0u64..(1u64 << n)).map(move |m| {
            let bits = (0..n).map(|j| ((m >> (n - 1 - j)) & 1) as u8).collect();
            SubmatrixSelector(bits)
        })
    }
}

impl fmt::Display for SubmatrixSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.0 {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}
