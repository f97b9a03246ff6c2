//! Coin matrices: construction, built-in families, and the coin file format.
//!
//! A coin is a unitary `2d x 2d` complex matrix acting on the chirality
//! components at every site. Unitarity is enforced at construction; the
//! tolerance is `1e-12` for programmatic constructors and `1e-10` for
//! matrices read from files, which may carry decimal-rounded entries.

use std::f64::consts::TAU;
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::Dimension;

/// Unitarity tolerance for exact programmatic constructors.
pub const CONSTRUCTOR_UNITARITY_TOL: f64 = 1e-12;
/// Unitarity tolerance for matrices parsed from coin files.
pub const FILE_UNITARITY_TOL: f64 = 1e-10;

/// A unitary coin matrix of size `2d x 2d`.
///
/// Row/column index `2j` belongs to the chirality component moving in `-e_j`,
/// index `2j+1` to the one moving in `+e_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoinMatrix {
    d: Dimension,
    entries: DMatrix<Complex64>,
}

impl CoinMatrix {
    /// Wraps a matrix after checking its shape and unitarity at the
    /// constructor tolerance `1e-12`.
    pub fn new(d: Dimension, entries: DMatrix<Complex64>) -> Result<Self> {
        Self::with_tolerance(d, entries, CONSTRUCTOR_UNITARITY_TOL)
    }

    /// Wraps a matrix with an explicit unitarity tolerance.
    pub fn with_tolerance(
        d: Dimension,
        entries: DMatrix<Complex64>,
        tolerance: f64,
    ) -> Result<Self> {
        let n = d.internal_dim();
        if entries.nrows() != n || entries.ncols() != n {
            return Err(Error::BadShape {
                d: d.get(),
                rows: entries.nrows(),
                cols: entries.ncols(),
                expected: n,
            });
        }
        let deviation = unitarity_deviation(&entries);
        if deviation > tolerance {
            return Err(Error::NotUnitary {
                deviation,
                tolerance,
            });
        }
        Ok(Self { d, entries })
    }

    /// The Fourier coin `C_d`: entry `(j, k)` is `w^(jk) / sqrt(2d)` with
    /// `w = exp(2 pi i / (2d))`. For `d = 1` this is the Hadamard matrix.
    pub fn fourier(d: Dimension) -> Self {
        let n = d.internal_dim();
        let scale = 1.0 / (n as f64).sqrt();
        // Reducing the exponent mod 2d keeps the phase in [0, 2pi) and makes
        // the matrix exactly symmetric entrywise.
        let entries = DMatrix::from_fn(n, n, |j, k| {
            Complex64::from_polar(scale, TAU * ((j * k) % n) as f64 / n as f64)
        });
        Self { d, entries }
    }

    /// The Hadamard coin, the `d = 1` Fourier coin.
    pub fn hadamard() -> Self {
        Self::fourier(Dimension::new(1).expect("1 >= 1"))
    }

    /// The 2-dimensional Grover coin, the reflection `J/2 - I` (`J` the
    /// all-ones matrix): off-diagonal entries `1/2`, diagonal `-1/2`.
    pub fn grover_2d() -> Self {
        let half = Complex64::new(0.5, 0.0);
        let entries = DMatrix::from_fn(4, 4, |j, k| if j == k { -half } else { half });
        Self {
            d: Dimension::new(2).expect("2 >= 1"),
            entries,
        }
    }

    /// Resolves a built-in coin name: `fourier:<d>`, `grover2d`, or
    /// `hadamard`.
    pub fn builtin(name: &str) -> Result<Self> {
        match name {
            "hadamard" => Ok(Self::hadamard()),
            "grover2d" => Ok(Self::grover_2d()),
            _ => match name.strip_prefix("fourier:") {
                Some(ds) => {
                    let d: usize = ds.parse().map_err(|_| Error::Parse {
                        what: "coin name",
                        message: format!("`{ds}` is not a valid dimension in `{name}`"),
                    })?;
                    Ok(Self::fourier(Dimension::new(d)?))
                }
                None => Err(Error::Parse {
                    what: "coin name",
                    message: format!(
                        "unknown coin `{name}`; expected fourier:<d>, grover2d, or hadamard"
                    ),
                }),
            },
        }
    }

    pub fn d(&self) -> Dimension {
        self.d
    }

    /// Size of the matrix, `2d`.
    pub fn internal_dim(&self) -> usize {
        self.d.internal_dim()
    }

    pub fn entry(&self, j: usize, k: usize) -> Complex64 {
        self.entries[(j, k)]
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    /// Parses a coin file document (see the module docs for the schema) and
    /// validates shape and unitarity at the file tolerance.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: CoinFile = serde_json::from_str(text).map_err(|e| Error::Parse {
            what: "coin file",
            message: e.to_string(),
        })?;
        let d = Dimension::new(file.d)?;
        let n = d.internal_dim();
        if file.matrix.len() != n {
            return Err(Error::BadShape {
                d: d.get(),
                rows: file.matrix.len(),
                cols: file.matrix.first().map_or(0, Vec::len),
                expected: n,
            });
        }
        for (j, row) in file.matrix.iter().enumerate() {
            if row.len() != n {
                return Err(Error::BadShape {
                    d: d.get(),
                    rows: n,
                    cols: row.len(),
                    expected: n,
                });
            }
            for (k, &[re, im]) in row.iter().enumerate() {
                if !re.is_finite() || !im.is_finite() {
                    return Err(Error::Parse {
                        what: "coin file",
                        message: format!("matrix[{j}][{k}] is not finite"),
                    });
                }
            }
        }
        let entries = DMatrix::from_fn(n, n, |j, k| {
            Complex64::new(file.matrix[j][k][0], file.matrix[j][k][1])
        });
        Self::with_tolerance(d, entries, FILE_UNITARITY_TOL)
    }

    /// Serializes to the coin file schema. Floats are written in shortest
    /// round-trip form, so reading the document back reproduces the matrix
    /// bit for bit.
    pub fn to_json_string(&self) -> String {
        let n = self.internal_dim();
        let matrix = (0..n)
            .map(|j| {
                (0..n)
                    .map(|k| {
                        let z = self.entries[(j, k)];
                        [z.re, z.im]
                    })
                    .collect()
            })
            .collect();
        let file = CoinFile {
            d: self.d.get(),
            matrix,
        };
        let mut s = serde_json::to_string_pretty(&file).expect("coin file serialization");
        s.push('\n');
        s
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

/// Max-norm of `C C^H - I`.
pub fn unitarity_deviation(m: &DMatrix<Complex64>) -> f64 {
    let n = m.nrows();
    let gram = m * m.adjoint();
    let mut dev: f64 = 0.0;
    for j in 0..n {
        for k in 0..n {
            let expected = if j == k {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            };
            dev = dev.max((gram[(j, k)] - expected).norm());
        }
    }
    dev
}

/// On-disk coin document: `{"d": <int>, "matrix": [[[re, im], ...], ...]}`,
/// row-major, `2d` rows of `2d` `[re, im]` pairs.
#[derive(Serialize, Deserialize)]
struct CoinFile {
    d: usize,
    matrix: Vec<Vec<[f64; 2]>>,
}

#[cfg(test)]
mod tests {
    use super::*;

    const ONE_OVER_SQRT2: f64 = std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn fourier_d1_is_hadamard() {
        let c = CoinMatrix::fourier(Dimension::new(1).unwrap());
        let expect = [
            [ONE_OVER_SQRT2, ONE_OVER_SQRT2],
            [ONE_OVER_SQRT2, -ONE_OVER_SQRT2],
        ];
        for j in 0..2 {
            for k in 0..2 {
                let z = c.entry(j, k);
                assert!((z.re - expect[j][k]).abs() < 1e-15, "entry ({j},{k}) = {z}");
                assert!(z.im.abs() < 1e-15);
            }
        }
        assert!((c.entry(0, 0).re - ONE_OVER_SQRT2).abs() < 1e-15);
    }

    #[test]
    fn fourier_d2_corner_entry() {
        // entry (3,3) = w_4^9 / 2 = i/2
        let c = CoinMatrix::fourier(Dimension::new(2).unwrap());
        let z = c.entry(3, 3);
        assert!((z - Complex64::new(0.0, 0.5)).norm() < 1e-15, "got {z}");
    }

    #[test]
    fn fourier_unitary_up_to_d8() {
        for d in 1..=8 {
            let c = CoinMatrix::fourier(Dimension::new(d).unwrap());
            let dev = unitarity_deviation(c.matrix());
            assert!(dev < 1e-12, "d = {d}: deviation {dev:.3e}");
        }
    }

    #[test]
    fn fourier_is_bitwise_symmetric() {
        for d in 1..=5 {
            let c = CoinMatrix::fourier(Dimension::new(d).unwrap());
            let n = c.internal_dim();
            for j in 0..n {
                for k in 0..n {
                    assert_eq!(c.entry(j, k), c.entry(k, j), "d = {d}, ({j},{k})");
                }
            }
        }
    }

    #[test]
    fn grover_entries_and_row_sums() {
        let c = CoinMatrix::grover_2d();
        assert_eq!(c.entry(0, 0), Complex64::new(-0.5, 0.0));
        for j in 0..4 {
            let sum: Complex64 = (0..4).map(|k| c.entry(j, k)).sum();
            assert!((sum - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn grover_is_real_symmetric_involutive_unitary() {
        let c = CoinMatrix::grover_2d();
        let m = c.matrix();
        for j in 0..4 {
            for k in 0..4 {
                assert_eq!(m[(j, k)].im, 0.0);
                assert_eq!(m[(j, k)], m[(k, j)]);
            }
        }
        let prod = m * m;
        let id = DMatrix::<Complex64>::identity(4, 4);
        assert!((&prod - &id).map(|z| z.norm()).max() < 1e-15);
        assert!(unitarity_deviation(m) < 1e-15);
    }

    #[test]
    fn builtin_names() {
        assert_eq!(CoinMatrix::builtin("hadamard").unwrap().d().get(), 1);
        assert_eq!(CoinMatrix::builtin("grover2d").unwrap().d().get(), 2);
        assert_eq!(CoinMatrix::builtin("fourier:3").unwrap().d().get(), 3);
        assert!(matches!(
            CoinMatrix::builtin("fourier:0"),
            Err(Error::InvalidDimension(0))
        ));
        assert!(CoinMatrix::builtin("fourier:x").is_err());
        assert!(CoinMatrix::builtin("walsh").is_err());
    }

    #[test]
    fn coin_file_round_trip_is_exact() {
        let c = CoinMatrix::fourier(Dimension::new(2).unwrap());
        let text = c.to_json_string();
        let back = CoinMatrix::from_json_str(&text).unwrap();
        let n = c.internal_dim();
        for j in 0..n {
            for k in 0..n {
                assert_eq!(c.entry(j, k), back.entry(j, k), "({j},{k})");
            }
        }
    }

    #[test]
    fn coin_file_rejects_non_unitary() {
        let doc = r#"{"d": 1, "matrix": [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.0, 0.0]]]}"#;
        match CoinMatrix::from_json_str(doc) {
            Err(Error::NotUnitary { deviation, .. }) => assert!(deviation > 0.5),
            other => panic!("expected NotUnitary, got {other:?}"),
        }
    }

    #[test]
    fn coin_file_rejects_wrong_shape() {
        // declares d = 2 but carries a 2x2 matrix
        let doc = r#"{"d": 2, "matrix": [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]]}"#;
        assert!(matches!(
            CoinMatrix::from_json_str(doc),
            Err(Error::BadShape {
                d: 2,
                expected: 4,
                ..
            })
        ));
    }

    #[test]
    fn coin_file_parse_error_names_field() {
        let doc = r#"{"matrix": []}"#;
        match CoinMatrix::from_json_str(doc) {
            Err(Error::Parse { message, .. }) => assert!(message.contains("d"), "{message}"),
            other => panic!("expected Parse, got {other:?}"),
        }
    }

    #[test]
    fn coin_file_rejects_ragged_rows() {
        let doc = r#"{"d": 1, "matrix": [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0]]]}"#;
        assert!(matches!(
            CoinMatrix::from_json_str(doc),
            Err(Error::BadShape { .. })
        ));
    }
}
