//! Finitely supported lattice states and the state file format.
//!
//! A [`LatticeState`] maps sites of `Z^d` to `2d`-component complex amplitude
//! vectors. Sites not stored carry the zero vector; storing an explicit zero
//! vector is allowed and semantically invisible (equality, norms, and all
//! downstream operations ignore it). Iteration over sites is lexicographic,
//! which keeps every derived output bit-reproducible.

use std::collections::BTreeMap;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::types::{Dimension, Position};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Per-site amplitude vector, stored inline for `2d <= 6`.
pub(crate) type Spin = SmallVec<[Complex64; 6]>;

/// A state with finite support: a finite association of sites to
/// `2d`-component amplitude vectors.
///
/// Entries are kept in a vector sorted by site so that a full evolution step
/// never rebuilds a tree; site lookup is a binary search.
#[derive(Debug, Clone)]
pub struct LatticeState {
    d: Dimension,
    amplitudes: Vec<(Position, Spin)>,
}

impl LatticeState {
    /// The zero state on `Z^d`.
    pub fn empty(d: Dimension) -> Self {
        Self {
            d,
            amplitudes: Vec::new(),
        }
    }

    /// A normalized state concentrated at `x` with the given spin vector.
    ///
    /// The spin is scaled to unit norm; an all-zero spin is rejected.
    pub fn delta(d: Dimension, x: Position, spin: &[Complex64]) -> Result<Self> {
        if x.dim() != d.get() {
            return Err(Error::DimensionMismatch {
                context: "delta state site",
                got: x.dim(),
                expected: d.get(),
            });
        }
        if spin.len() != d.internal_dim() {
            return Err(Error::DimensionMismatch {
                context: "delta state spin",
                got: spin.len(),
                expected: d.internal_dim(),
            });
        }
        let norm = spin.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::ZeroAmplitude);
        }
        let scaled: Spin = spin.iter().map(|z| z / norm).collect();
        Ok(Self {
            d,
            amplitudes: vec![(x, scaled)],
        })
    }

    /// The stationary state of the 2-dimensional Grover walk: amplitude
    /// `(1,0,1,0)/(2 sqrt 2)` at `(0,0)`, `(0,1,1,0)/(2 sqrt 2)` at `(1,0)`,
    /// `(1,0,0,1)/(2 sqrt 2)` at `(0,1)`, and `(0,1,0,1)/(2 sqrt 2)` at
    /// `(1,1)`. It is an exact eigenvector of the Grover-walk evolution with
    /// eigenvalue 1, kept in this fixed normalization.
    pub fn grover_stationary() -> Self {
        let d = Dimension::new(2).expect("2 >= 1");
        let a = Complex64::new(1.0 / (2.0 * 2.0_f64.sqrt()), 0.0);
        let entries: [(Position, [Complex64; 4]); 4] = [
            (Position::from([0, 0]), [a, ZERO, a, ZERO]),
            (Position::from([0, 1]), [a, ZERO, ZERO, a]),
            (Position::from([1, 0]), [ZERO, a, a, ZERO]),
            (Position::from([1, 1]), [ZERO, a, ZERO, a]),
        ];
        let amplitudes = entries
            .into_iter()
            .map(|(p, v)| (p, Spin::from_slice(&v)))
            .collect();
        Self { d, amplitudes }
    }

    /// Builds a state from site/amplitude pairs. Vector lengths are checked
    /// and duplicate sites rejected; no normalization is applied.
    pub fn from_entries<I>(d: Dimension, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Position, Vec<Complex64>)>,
    {
        let mut amplitudes: Vec<(Position, Spin)> = Vec::new();
        for (pos, vec) in entries {
            if pos.dim() != d.get() {
                return Err(Error::DimensionMismatch {
                    context: "state entry site",
                    got: pos.dim(),
                    expected: d.get(),
                });
            }
            if vec.len() != d.internal_dim() {
                return Err(Error::DimensionMismatch {
                    context: "state entry amplitude",
                    got: vec.len(),
                    expected: d.internal_dim(),
                });
            }
            amplitudes.push((pos, Spin::from_vec(vec)));
        }
        amplitudes.sort_by(|a, b| a.0.cmp(&b.0));
        if let Some(w) = amplitudes.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidArgument(format!(
                "duplicate site {} in state entries",
                w[0].0
            )));
        }
        Ok(Self { d, amplitudes })
    }

    /// Internal constructor for entries already in lexicographic order with
    /// unique sites.
    pub(crate) fn from_sorted_entries(d: Dimension, entries: Vec<(Position, Spin)>) -> Self {
        debug_assert!(entries.windows(2).all(|w| w[0].0 < w[1].0));
        Self {
            d,
            amplitudes: entries,
        }
    }

    fn lookup(&self, x: &Position) -> Option<&Spin> {
        self.amplitudes
            .binary_search_by(|(p, _)| p.cmp(x))
            .ok()
            .map(|i| &self.amplitudes[i].1)
    }

    pub fn d(&self) -> Dimension {
        self.d
    }

    /// Sites in lexicographic order with their amplitude vectors, stored
    /// zeros included.
    pub fn iter(&self) -> impl Iterator<Item = (&Position, &[Complex64])> {
        self.amplitudes.iter().map(|(p, v)| (p, v.as_slice()))
    }

    /// The stored amplitude vector at `x`, if any.
    pub fn amplitude(&self, x: &Position) -> Option<&[Complex64]> {
        self.lookup(x).map(|v| v.as_slice())
    }

    /// `|Psi(x)|^2`, zero for sites that are not stored.
    pub fn site_probability(&self, x: &Position) -> f64 {
        self.lookup(x)
            .map_or(0.0, |v| v.iter().map(|z| z.norm_sqr()).sum())
    }

    /// Number of stored sites, including explicit zeros.
    pub fn stored_sites(&self) -> usize {
        self.amplitudes.len()
    }

    /// Number of sites carrying a nonzero amplitude vector.
    pub fn support_size(&self) -> usize {
        self.support().count()
    }

    /// Sites with a nonzero amplitude vector, in lexicographic order.
    pub fn support(&self) -> impl Iterator<Item = &Position> {
        self.amplitudes
            .iter()
            .filter(|(_, v)| v.iter().any(|z| z.re != 0.0 || z.im != 0.0))
            .map(|(p, _)| p)
    }

    /// Squared l2 norm, summed in lexicographic site order.
    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|(_, v)| v.iter().map(|z| z.norm_sqr()).sum::<f64>())
            .sum()
    }

    /// l2 norm of the state.
    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// This state scaled to unit norm.
    pub fn normalized(&self) -> Result<Self> {
        let norm = self.norm();
        if norm == 0.0 {
            return Err(Error::ZeroAmplitude);
        }
        Ok(self.scaled(Complex64::new(1.0 / norm, 0.0)))
    }

    /// The state with every amplitude multiplied by `factor`.
    pub fn scaled(&self, factor: Complex64) -> Self {
        let amplitudes = self
            .amplitudes
            .iter()
            .map(|(p, v)| (p.clone(), v.iter().map(|z| z * factor).collect()))
            .collect();
        Self {
            d: self.d,
            amplitudes,
        }
    }

    /// The linear combination `sum_i coeff_i * state_i`. All states must share
    /// one dimension; per-component sums run in term order.
    pub fn linear_combination(terms: &[(Complex64, &LatticeState)]) -> Result<Self> {
        let d = match terms.first() {
            Some((_, s)) => s.d,
            None => return Err(Error::InvalidArgument("empty linear combination".into())),
        };
        let n = d.internal_dim();
        let mut accumulator: BTreeMap<Position, Spin> = BTreeMap::new();
        for (coeff, state) in terms {
            if state.d != d {
                return Err(Error::DimensionMismatch {
                    context: "linear combination",
                    got: state.d.get(),
                    expected: d.get(),
                });
            }
            for (pos, vec) in state.iter() {
                let acc = accumulator
                    .entry(pos.clone())
                    .or_insert_with(|| Spin::from_elem(ZERO, n));
                for (a, z) in acc.iter_mut().zip(vec) {
                    *a += coeff * z;
                }
            }
        }
        Ok(Self {
            d,
            amplitudes: accumulator.into_iter().collect(),
        })
    }

    /// Inner product `<self, other>`, conjugate-linear in `self`.
    pub fn inner(&self, other: &LatticeState) -> Complex64 {
        let mut acc = ZERO;
        for (pos, vec) in self.iter() {
            if let Some(w) = other.amplitude(pos) {
                for (a, b) in vec.iter().zip(w) {
                    acc += a.conj() * b;
                }
            }
        }
        acc
    }

    /// Largest componentwise difference `max_x max_i |a_i(x) - b_i(x)|` over
    /// the union of stored sites.
    pub fn max_component_difference(&self, other: &LatticeState) -> f64 {
        let mut max: f64 = 0.0;
        for (pos, vec) in self.iter() {
            match other.amplitude(pos) {
                Some(w) => {
                    for (a, b) in vec.iter().zip(w) {
                        max = max.max((a - b).norm());
                    }
                }
                None => {
                    for a in vec {
                        max = max.max(a.norm());
                    }
                }
            }
        }
        for (pos, w) in other.iter() {
            if self.amplitude(pos).is_none() {
                for b in w {
                    max = max.max(b.norm());
                }
            }
        }
        max
    }

    /// Parses a state file document (see the module docs for the schema).
    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: StateFile = serde_json::from_str(text).map_err(|e| Error::Parse {
            what: "state file",
            message: e.to_string(),
        })?;
        let d = Dimension::new(file.d)?;
        let n = d.internal_dim();
        let mut amplitudes: BTreeMap<Position, Spin> = BTreeMap::new();
        for (i, entry) in file.entries.iter().enumerate() {
            if entry.x.len() != d.get() {
                return Err(Error::Parse {
                    what: "state file",
                    message: format!(
                        "entries[{i}].x has {} coordinates, expected {}",
                        entry.x.len(),
                        d.get()
                    ),
                });
            }
            if entry.amp.len() != n {
                return Err(Error::Parse {
                    what: "state file",
                    message: format!(
                        "entries[{i}].amp has {} components, expected {n}",
                        entry.amp.len()
                    ),
                });
            }
            for (c, &[re, im]) in entry.amp.iter().enumerate() {
                if !re.is_finite() || !im.is_finite() {
                    return Err(Error::Parse {
                        what: "state file",
                        message: format!("entries[{i}].amp[{c}] is not finite"),
                    });
                }
            }
            let pos = Position::new(&entry.x);
            let vec: Spin = entry
                .amp
                .iter()
                .map(|&[re, im]| Complex64::new(re, im))
                .collect();
            if amplitudes.insert(pos, vec).is_some() {
                return Err(Error::Parse {
                    what: "state file",
                    message: format!("entries[{i}] repeats an earlier site"),
                });
            }
        }
        Ok(Self {
            d,
            amplitudes: amplitudes.into_iter().collect(),
        })
    }

    fn file_doc(&self) -> StateFile {
        let entries = self
            .amplitudes
            .iter()
            .map(|(pos, vec)| StateEntry {
                x: pos.coords().to_vec(),
                amp: vec.iter().map(|z| [z.re, z.im]).collect(),
            })
            .collect();
        StateFile {
            d: self.d.get(),
            entries,
        }
    }

    /// Serializes to the state file schema with entries in lexicographic site
    /// order. Floats round-trip bit for bit.
    pub fn to_json_string(&self) -> String {
        let mut s =
            serde_json::to_string_pretty(&self.file_doc()).expect("state file serialization");
        s.push('\n');
        s
    }

    /// The state file document as a JSON value, for embedding in reports.
    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(self.file_doc()).expect("state file serialization")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json_string())?;
        Ok(())
    }
}

/// Support-insensitive exact equality: explicit zero vectors compare equal to
/// absent sites.
impl PartialEq for LatticeState {
    fn eq(&self, other: &Self) -> bool {
        if self.d != other.d {
            return false;
        }
        let zero_row = |v: &[Complex64]| v.iter().all(|z| z.re == 0.0 && z.im == 0.0);
        for (pos, vec) in self.iter() {
            match other.amplitude(pos) {
                Some(w) => {
                    if vec != w {
                        return false;
                    }
                }
                None => {
                    if !zero_row(vec) {
                        return false;
                    }
                }
            }
        }
        for (pos, w) in other.iter() {
            if self.amplitude(pos).is_none() && !zero_row(w) {
                return false;
            }
        }
        true
    }
}

/// On-disk state document:
/// `{"d": <int>, "entries": [{"x": [<int> x d], "amp": [[re, im] x 2d]}, ...]}`.
#[derive(Serialize, Deserialize)]
struct StateFile {
    d: usize,
    entries: Vec<StateEntry>,
}

#[derive(Serialize, Deserialize)]
struct StateEntry {
    x: Vec<i64>,
    amp: Vec<[f64; 2]>,
}
