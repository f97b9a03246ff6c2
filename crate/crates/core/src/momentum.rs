//! Momentum-space representation of the walk and constant-eigenvalue scans
//! over the Brillouin zone.
//!
//! Under the Fourier transform `Psi^(k) = sum_x exp(-i <k, x>) Psi(x)` the
//! position-space update rule turns into multiplication by
//!
//! ```text
//! U(k) = diag(e^{+i k_0}, e^{-i k_0}, ..., e^{+i k_{d-1}}, e^{-i k_{d-1}}) C.
//! ```
//!
//! The phase signs follow from the stencil: component `2j` of a target site
//! reads its source at `x + e_j`, which contributes `exp(+i k_j)` after the
//! substitution `y = x + e_j`, while component `2j+1` reads `x - e_j` and
//! picks up `exp(-i k_j)`. Walks admitting a k-independent eigenvalue of
//! `U(k)` are exactly the localizing ones, which is what the scan looks for.

use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::coin::CoinMatrix;
use crate::error::{Error, Result};
use crate::types::Dimension;

/// Guard on the total number of grid points a scan may visit.
pub const SCAN_GRID_LIMIT: u128 = 10_000_000;
/// Two candidate eigenvalues closer than this are treated as one.
pub const CANDIDATE_DEDUP_TOL: f64 = 1e-8;
/// Default grid resolution per axis.
pub const DEFAULT_SCAN_GRID: usize = 32;
/// Default constancy tolerance: far below the deviation scale of
/// non-constant bands, far above eigensolver noise.
pub const DEFAULT_SCAN_TOL: f64 = 1e-8;

/// A momentum point `k` in the Brillouin zone `[0, 2 pi)^d`.
///
/// Components are reduced modulo `2 pi` at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumPoint(Vec<f64>);

impl MomentumPoint {
    pub fn new(k: &[f64]) -> Self {
        Self(
            k.iter()
                .map(|&x| {
                    let r = x.rem_euclid(TAU);
                    // rem_euclid can return the period itself when x is a
                    // tiny negative number
                    if r >= TAU {
                        0.0
                    } else {
                        r
                    }
                })
                .collect(),
        )
    }

    pub fn zero(d: Dimension) -> Self {
        Self(vec![0.0; d.get()])
    }

    pub fn components(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

/// The `2d x 2d` unitary `U(k) = D(k) C` at one momentum point.
#[derive(Debug, Clone)]
pub struct MomentumOperator {
    d: Dimension,
    matrix: DMatrix<Complex64>,
}

impl MomentumOperator {
    pub fn d(&self) -> Dimension {
        self.d
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }
}

/// One candidate eigenvalue together with the largest distance from it to the
/// nearest eigenvalue of `U(k)` over the sampled grid.
#[derive(Debug, Clone, Serialize)]
pub struct EigenvalueCandidate {
    #[serde(with = "crate::serde_complex")]
    pub lambda: Complex64,
    pub max_deviation: f64,
}

/// Outcome of a constant-eigenvalue scan.
///
/// A nonempty `constant_eigenvalues` list is evidence for localization; an
/// empty one is evidence against it on the sampled grid only, not a proof.
#[derive(Debug, Clone, Serialize)]
pub struct ConstancyReport {
    pub d: Dimension,
    /// Grid resolution per axis.
    pub grid: usize,
    /// Constancy tolerance the candidates were filtered with.
    pub tol: f64,
    /// Eigenvalues of `U(0)`, deduplicated, sorted by principal argument.
    pub candidates: Vec<EigenvalueCandidate>,
    /// Candidates whose `max_deviation` stayed within the tolerance.
    pub constant_eigenvalues: Vec<EigenvalueCandidate>,
}

/// Builds `U(k) = D(k) C` with component `2j` carrying `exp(+i k_j)` and
/// component `2j+1` carrying `exp(-i k_j)`.
pub fn momentum_operator(coin: &CoinMatrix, k: &MomentumPoint) -> Result<MomentumOperator> {
    let d = coin.d();
    if k.dim() != d.get() {
        return Err(Error::DimensionMismatch {
            context: "momentum point versus coin",
            got: k.dim(),
            expected: d.get(),
        });
    }
    let mut phases = DVector::from_element(d.internal_dim(), Complex64::new(1.0, 0.0));
    for (j, &kj) in k.components().iter().enumerate() {
        phases[2 * j] = Complex64::from_polar(1.0, kj);
        phases[2 * j + 1] = Complex64::from_polar(1.0, -kj);
    }
    let matrix = DMatrix::from_diagonal(&phases) * coin.matrix();
    Ok(MomentumOperator { d, matrix })
}

/// Argument used for sorting eigenvalues: principal value in `(-pi, pi]`,
/// with results within `1e-9` of the branch cut folded onto `+pi` so that an
/// eigenvalue of `-1` sorts identically whichever side of the cut solver
/// noise lands it on.
fn canonical_arg(z: Complex64) -> f64 {
    let a = z.arg();
    if a < -std::f64::consts::PI + 1e-9 {
        a + TAU
    } else {
        a
    }
}

/// Eigenvalues of `U(k)`, sorted by principal argument ascending.
///
/// Every eigenvalue of a momentum operator lies on the unit circle; a result
/// further than `1e-9` from it is reported as a solver failure.
pub fn spectrum(coin: &CoinMatrix, k: &MomentumPoint) -> Result<Vec<Complex64>> {
    let op = momentum_operator(coin, k)?;
    let n = op.matrix.nrows();
    let schur = op
        .matrix
        .clone()
        .try_schur(f64::EPSILON, 100_000)
        .ok_or_else(|| Error::EigenSolver {
            k: k.components().to_vec(),
        })?;
    let triangular = schur.unpack().1;
    let mut eigenvalues: Vec<Complex64> = (0..n).map(|i| triangular[(i, i)]).collect();
    if eigenvalues.iter().any(|z| (z.norm() - 1.0).abs() > 1e-9) {
        return Err(Error::EigenSolver {
            k: k.components().to_vec(),
        });
    }
    eigenvalues.sort_by(|a, b| canonical_arg(*a).total_cmp(&canonical_arg(*b)));
    Ok(eigenvalues)
}

/// Scans a uniform `grid^d` Brillouin-zone grid (`k_j = 2 pi m / grid`,
/// endpoint excluded) for eigenvalues of `U(k)` that do not move with `k`.
///
/// Candidates are seeded from `k = 0`: a truly constant eigenvalue must in
/// particular appear there, so this detects every constant eigenvalue. Each
/// candidate is matched by nearest distance to the sampled spectra rather
/// than by band tracking.
pub fn constant_eigenvalue_scan(
    coin: &CoinMatrix,
    grid: usize,
    tol: f64,
) -> Result<ConstancyReport> {
    let d = coin.d();
    if grid < 2 {
        return Err(Error::InvalidArgument(format!(
            "scan grid must have at least 2 points per axis, got {grid}"
        )));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "scan tolerance must be positive, got {tol}"
        )));
    }
    let total = (grid as u128)
        .checked_pow(d.get() as u32)
        .unwrap_or(u128::MAX);
    if total > SCAN_GRID_LIMIT {
        return Err(Error::ResourceGuard {
            what: "constant-eigenvalue scan",
            required: total,
            limit: SCAN_GRID_LIMIT,
            unit: "grid points",
        });
    }

    let at_zero = spectrum(coin, &MomentumPoint::zero(d))?;
    let mut lambdas: Vec<Complex64> = Vec::new();
    for z in at_zero {
        if lambdas.iter().all(|w| (w - z).norm() > CANDIDATE_DEDUP_TOL) {
            lambdas.push(z);
        }
    }

    let mut deviations = vec![0.0f64; lambdas.len()];
    let mut index = vec![0usize; d.get()];
    loop {
        let k = MomentumPoint::new(
            &index
                .iter()
                .map(|&m| TAU * m as f64 / grid as f64)
                .collect::<Vec<_>>(),
        );
        let eigenvalues = spectrum(coin, &k)?;
        for (dev, lambda) in deviations.iter_mut().zip(&lambdas) {
            let dist = eigenvalues
                .iter()
                .map(|z| (z - lambda).norm())
                .fold(f64::INFINITY, f64::min);
            *dev = dev.max(dist);
        }
        // odometer increment over [0, grid)^d
        let mut axis = d.get();
        loop {
            if axis == 0 {
                break;
            }
            axis -= 1;
            index[axis] += 1;
            if index[axis] < grid {
                break;
            }
            index[axis] = 0;
        }
        if index.iter().all(|&m| m == 0) {
            break;
        }
    }

    let candidates: Vec<EigenvalueCandidate> = lambdas
        .iter()
        .zip(&deviations)
        .map(|(&lambda, &max_deviation)| EigenvalueCandidate {
            lambda,
            max_deviation,
        })
        .collect();
    let constant_eigenvalues = candidates
        .iter()
        .filter(|c| c.max_deviation <= tol)
        .cloned()
        .collect();
    Ok(ConstancyReport {
        d,
        grid,
        tol,
        candidates,
        constant_eigenvalues,
    })
}
