//! Position-space time evolution under `U = S (I (x) C)` and bounded-time
//! return-probability diagnostics.
//!
//! One step maps a state `Psi` to `Psi'` with
//!
//! ```text
//! Psi'(x)[2j]   = (C Psi(x + e_j))[2j]
//! Psi'(x)[2j+1] = (C Psi(x - e_j))[2j+1]
//! ```
//!
//! i.e. the coin acts at every site and the shift then moves component `2j`
//! one step in `-e_j` and component `2j+1` in `+e_j`. Every target component
//! receives exactly one contribution, so the result is independent of any
//! processing order; sites are nevertheless always swept lexicographically so
//! that recorded norms and serialized outputs are bit-reproducible.
//!
//! No amplitude pruning is performed: the stored support after `n` steps is
//! exactly the set reachable through the stencil, which keeps the support
//! growth bound a structural fact rather than a numerical one.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::coin::CoinMatrix;
use crate::error::{Error, Result};
use crate::state::LatticeState;
use crate::types::{Dimension, Position};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Hard cap on the number of basis vectors a dense truncated operator may
/// span.
pub const DENSE_OPERATOR_BASIS_LIMIT: u128 = 1_000_000;

/// One row of a return-probability time series.
#[derive(Debug, Clone, Serialize)]
pub struct EvolutionRecord {
    /// Step number `n`, starting at 0 for the initial state.
    pub step_index: usize,
    /// State norm after `n` steps.
    pub norm: f64,
    /// `|Psi_n(x0)|^2` at the tracked site.
    pub return_probability: f64,
    /// Running time average `(1/(n+1)) sum_{m<=n} |Psi_m(x0)|^2`.
    pub avg_return_probability: f64,
    /// Number of sites carrying a nonzero amplitude vector.
    pub support_size: usize,
}

fn check_dims(state: &LatticeState, coin: &CoinMatrix) -> Result<()> {
    if state.d() != coin.d() {
        return Err(Error::DimensionMismatch {
            context: "state versus coin",
            got: state.d().get(),
            expected: coin.d().get(),
        });
    }
    Ok(())
}

/// Applies one step of `U = S (I (x) C)`.
pub fn step(state: &LatticeState, coin: &CoinMatrix) -> Result<LatticeState> {
    check_dims(state, coin)?;
    let d = state.d();

    let sources: Vec<(&Position, &[Complex64])> = state.iter().collect();
    if sources.is_empty() {
        return Ok(LatticeState::empty(d));
    }

    // Contiguous copies of the coin rows; row c is dotted against source
    // spins when component c is emitted.
    let m = d.internal_dim();
    let rows: Vec<Vec<Complex64>> = (0..m)
        .map(|c| (0..m).map(|k| coin.entry(c, k)).collect())
        .collect();

    // One cursor per chirality component walks the (lexicographically
    // sorted) source list; shifting by a constant preserves the order, so a
    // k-way merge of the 2d cursors produces targets in sorted order and each
    // (site, component) slot is written exactly once. For small dimensions
    // the merge keys are positions packed into one integer, which keeps the
    // heap comparisons scalar.
    let merged = match packed_keys(&sources, d) {
        Some(keys) => step_merge_packed(&sources, &keys, &rows, d),
        None => step_merge_generic(&sources, &rows, d),
    };
    Ok(LatticeState::from_sorted_entries(d, merged))
}

const PACK_FIELD_BITS: u32 = 21;
const PACK_FIELD_OFFSET: i64 = 1 << 20;
/// Margin keeps one step of shift inside the field range.
const PACK_COORD_LIMIT: i64 = PACK_FIELD_OFFSET - 2;

/// Packs coordinates into one integer whose numeric order equals the
/// lexicographic coordinate order. `None` when a coordinate is out of range
/// or the dimension does not fit.
fn packed_keys(sources: &[(&Position, &[Complex64])], d: Dimension) -> Option<Vec<i128>> {
    if d.get() * PACK_FIELD_BITS as usize > 126 {
        return None;
    }
    let mut keys = Vec::with_capacity(sources.len());
    for (pos, _) in sources {
        let mut key: i128 = 0;
        for &c in pos.coords() {
            if c.abs() > PACK_COORD_LIMIT {
                return None;
            }
            key = (key << PACK_FIELD_BITS) | (c + PACK_FIELD_OFFSET) as i128;
        }
        keys.push(key);
    }
    Some(keys)
}

fn row_dot(row: &[Complex64], spin: &[Complex64]) -> Complex64 {
    let mut value = ZERO;
    for (a, b) in row.iter().zip(spin) {
        value += a * b;
    }
    value
}

fn step_merge_packed(
    sources: &[(&Position, &[Complex64])],
    keys: &[i128],
    rows: &[Vec<Complex64>],
    d: Dimension,
) -> Vec<(Position, crate::state::Spin)> {
    let m = d.internal_dim();
    // key offset of the shift applied to component c
    let offsets: Vec<i128> = (0..m)
        .map(|c| {
            let axis = c / 2;
            let shift = 1i128 << (PACK_FIELD_BITS as usize * (d.get() - 1 - axis));
            if c % 2 == 0 {
                -shift
            } else {
                shift
            }
        })
        .collect();

    let mut heap: BinaryHeap<Reverse<(i128, usize, usize)>> = BinaryHeap::with_capacity(m);
    for (c, &off) in offsets.iter().enumerate() {
        heap.push(Reverse((keys[0] + off, c, 0)));
    }

    let mut merged: Vec<(Position, crate::state::Spin)> =
        Vec::with_capacity(sources.len() + sources.len() / 2 + 8);
    let mut last_key = i128::MIN;
    while let Some(Reverse((key, c, idx))) = heap.pop() {
        let value = row_dot(&rows[c], sources[idx].1);
        if key == last_key {
            merged.last_mut().expect("entry exists for last_key").1[c] = value;
        } else {
            let axis = c / 2;
            let delta = if c % 2 == 0 { -1 } else { 1 };
            let pos = sources[idx].0.shifted(axis, delta);
            let mut acc = crate::state::Spin::from_elem(ZERO, m);
            acc[c] = value;
            merged.push((pos, acc));
            last_key = key;
        }
        if idx + 1 < sources.len() {
            heap.push(Reverse((keys[idx + 1] + offsets[c], c, idx + 1)));
        }
    }
    merged
}

fn step_merge_generic(
    sources: &[(&Position, &[Complex64])],
    rows: &[Vec<Complex64>],
    d: Dimension,
) -> Vec<(Position, crate::state::Spin)> {
    let m = d.internal_dim();
    let target_of = |pos: &Position, c: usize| -> Position {
        let axis = c / 2;
        let delta = if c.is_multiple_of(2) { -1 } else { 1 };
        pos.shifted(axis, delta)
    };

    let mut heap: BinaryHeap<Reverse<(Position, usize, usize)>> = BinaryHeap::with_capacity(m);
    for c in 0..m {
        heap.push(Reverse((target_of(sources[0].0, c), c, 0)));
    }

    let mut merged: Vec<(Position, crate::state::Spin)> =
        Vec::with_capacity(sources.len() + sources.len() / 2 + 8);
    while let Some(Reverse((pos, c, idx))) = heap.pop() {
        let value = row_dot(&rows[c], sources[idx].1);
        match merged.last_mut() {
            Some((last_pos, acc)) if *last_pos == pos => acc[c] = value,
            _ => {
                let mut acc = crate::state::Spin::from_elem(ZERO, m);
                acc[c] = value;
                merged.push((pos, acc));
            }
        }
        if idx + 1 < sources.len() {
            heap.push(Reverse((target_of(sources[idx + 1].0, c), c, idx + 1)));
        }
    }
    merged
}

/// Applies `n` steps; `n = 0` returns the initial state unchanged.
pub fn evolve(state: &LatticeState, coin: &CoinMatrix, n: usize) -> Result<LatticeState> {
    check_dims(state, coin)?;
    let mut current = state.clone();
    for _ in 0..n {
        current = step(&current, coin)?;
    }
    Ok(current)
}

/// Evolves `n_max` steps and records norm, return probability at `x0`, its
/// running time average, and the support size for every `n` in `0..=n_max`.
pub fn return_probability_series(
    state: &LatticeState,
    coin: &CoinMatrix,
    x0: &Position,
    n_max: usize,
) -> Result<Vec<EvolutionRecord>> {
    check_dims(state, coin)?;
    if x0.dim() != state.d().get() {
        return Err(Error::DimensionMismatch {
            context: "tracked site",
            got: x0.dim(),
            expected: state.d().get(),
        });
    }
    if n_max < 1 {
        return Err(Error::InvalidArgument(
            "return-probability series needs at least one step".into(),
        ));
    }

    let mut records = Vec::with_capacity(n_max + 1);
    let mut current = state.clone();
    let mut prob_sum = 0.0;
    for n in 0..=n_max {
        if n > 0 {
            current = step(&current, coin)?;
        }
        let return_probability = current.site_probability(x0);
        prob_sum += return_probability;
        records.push(EvolutionRecord {
            step_index: n,
            norm: current.norm(),
            return_probability,
            avg_return_probability: prob_sum / (n + 1) as f64,
            support_size: current.support_size(),
        });
    }
    Ok(records)
}

/// Basis of the truncated space spanned by `(site, chirality)` pairs with the
/// site in the centered L-infinity box of a given radius.
///
/// Basis vectors are ordered site-lexicographically, then by chirality:
/// `index = site_ordinal * 2d + chirality`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoxBasis {
    d: Dimension,
    radius: usize,
    side: i64,
    site_count: usize,
    len: usize,
}

impl BoxBasis {
    pub fn new(d: Dimension, radius: usize) -> Result<Self> {
        let side = 2 * radius as u128 + 1;
        let site_count = side.checked_pow(d.get() as u32).unwrap_or(u128::MAX);
        let len = site_count.saturating_mul(d.internal_dim() as u128);
        // Generous internal cap; operations layer tighter guards on top.
        if len > 100 * DENSE_OPERATOR_BASIS_LIMIT {
            return Err(Error::ResourceGuard {
                what: "box basis",
                required: len,
                limit: 100 * DENSE_OPERATOR_BASIS_LIMIT,
                unit: "basis vectors",
            });
        }
        Ok(Self {
            d,
            radius,
            side: side as i64,
            site_count: site_count as usize,
            len: len as usize,
        })
    }

    pub fn d(&self) -> Dimension {
        self.d
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    /// Number of sites in the box, `(2 radius + 1)^d`.
    pub fn site_count(&self) -> usize {
        self.site_count
    }

    /// Total basis dimension, `site_count * 2d`.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Basis index of `(pos, chirality)`, or `None` if the site is outside
    /// the box.
    pub fn index_of(&self, pos: &Position, chirality: usize) -> Option<usize> {
        let r = self.radius as i64;
        let mut ordinal: usize = 0;
        for &c in pos.coords() {
            if c < -r || c > r {
                return None;
            }
            ordinal = ordinal * self.side as usize + (c + r) as usize;
        }
        Some(ordinal * self.d.internal_dim() + chirality)
    }

    /// The site with the given lexicographic ordinal.
    pub fn position_of(&self, site_ordinal: usize) -> Position {
        let n = self.d.get();
        let r = self.radius as i64;
        let mut coords = vec![0i64; n];
        let mut rest = site_ordinal;
        for j in (0..n).rev() {
            coords[j] = (rest % self.side as usize) as i64 - r;
            rest /= self.side as usize;
        }
        Position::new(&coords)
    }

    /// Flattens a state supported inside the box into a coordinate vector.
    pub fn vectorize(&self, state: &LatticeState) -> Result<DVector<Complex64>> {
        if state.d() != self.d {
            return Err(Error::DimensionMismatch {
                context: "state versus box basis",
                got: state.d().get(),
                expected: self.d.get(),
            });
        }
        let mut v = DVector::from_element(self.len, ZERO);
        for (pos, vec) in state.iter() {
            match self.index_of(pos, 0) {
                Some(base) => {
                    for (c, z) in vec.iter().enumerate() {
                        v[base + c] = *z;
                    }
                }
                None => {
                    if vec.iter().any(|z| z.re != 0.0 || z.im != 0.0) {
                        return Err(Error::InvalidArgument(format!(
                            "state has support at {pos}, outside the radius-{} box",
                            self.radius
                        )));
                    }
                }
            }
        }
        Ok(v)
    }

    /// Rebuilds a state from a coordinate vector; all-zero site rows are
    /// dropped.
    pub fn state_from_vector(&self, v: &DVector<Complex64>) -> Result<LatticeState> {
        if v.len() != self.len {
            return Err(Error::DimensionMismatch {
                context: "coordinate vector versus box basis",
                got: v.len(),
                expected: self.len,
            });
        }
        let m = self.d.internal_dim();
        let mut entries = Vec::new();
        for s in 0..self.site_count {
            let row = &v.as_slice()[s * m..(s + 1) * m];
            if row.iter().any(|z| z.re != 0.0 || z.im != 0.0) {
                entries.push((self.position_of(s), crate::state::Spin::from_slice(row)));
            }
        }
        Ok(LatticeState::from_sorted_entries(self.d, entries))
    }
}

/// The matrix of `U` restricted to the radius-`r` box, landing in the
/// radius-`r+1` box.
#[derive(Debug, Clone)]
pub struct DenseOperator {
    matrix: DMatrix<Complex64>,
    source: BoxBasis,
    target: BoxBasis,
}

impl DenseOperator {
    /// Rows index the target (radius + 1) basis, columns the source basis.
    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn source(&self) -> &BoxBasis {
        &self.source
    }

    pub fn target(&self) -> &BoxBasis {
        &self.target
    }

    /// Applies the truncated operator to a state supported in the source box.
    pub fn apply(&self, state: &LatticeState) -> Result<LatticeState> {
        let v = self.source.vectorize(state)?;
        let w = &self.matrix * v;
        self.target.state_from_vector(&w)
    }
}

/// Builds the dense matrix of `U` from the radius box into the radius+1 box.
///
/// Every column holds the `2d` stencil entries of one source basis vector:
/// `U |x, k> = sum_j C[2j, k] |x - e_j, 2j> + C[2j+1, k] |x + e_j, 2j+1>`.
pub fn dense_operator(coin: &CoinMatrix, radius: usize) -> Result<DenseOperator> {
    let d = coin.d();
    let m = d.internal_dim();
    let target_len = (2 * radius as u128 + 3)
        .checked_pow(d.get() as u32)
        .unwrap_or(u128::MAX)
        * m as u128;
    if target_len > DENSE_OPERATOR_BASIS_LIMIT {
        return Err(Error::ResourceGuard {
            what: "dense operator target basis",
            required: target_len,
            limit: DENSE_OPERATOR_BASIS_LIMIT,
            unit: "basis vectors",
        });
    }
    let source = BoxBasis::new(d, radius)?;
    let target = BoxBasis::new(d, radius + 1)?;

    let mut matrix = DMatrix::from_element(target.len(), source.len(), ZERO);
    for s in 0..source.site_count() {
        let pos = source.position_of(s);
        for k in 0..m {
            let col = s * m + k;
            for j in 0..d.get() {
                let back = target
                    .index_of(&pos.shifted(j, -1), 2 * j)
                    .expect("source box + 1 step stays inside target box");
                let forth = target
                    .index_of(&pos.shifted(j, 1), 2 * j + 1)
                    .expect("source box + 1 step stays inside target box");
                matrix[(back, col)] = coin.entry(2 * j, k);
                matrix[(forth, col)] = coin.entry(2 * j + 1, k);
            }
        }
    }
    Ok(DenseOperator {
        matrix,
        source,
        target,
    })
}
