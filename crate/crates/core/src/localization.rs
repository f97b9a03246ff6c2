//! Localization decision machinery: coin-submatrix rank tests, Fourier-walk
//! certificates, the truncated finite-support eigenvector search, and the
//! combined verdict.
//!
//! Three facts are wired together here.
//!
//! * A localizing space-homogeneous walk forces every `d x d` coin submatrix
//!   `C^(l)`, `l in {0,1}^d`, to be rank-deficient. Contrapositively, one
//!   full-rank submatrix certifies that localization is impossible.
//! * Localization is equivalent to the existence of a finite-support
//!   eigenvector of the evolution operator for some `|lambda| = 1`, so a
//!   nonzero vector found by the truncated nullspace search is a sound
//!   localization witness. An empty search only rules out eigenvectors
//!   supported in the searched box and never upgrades to a no-localization
//!   claim.
//! * For the Fourier coin a specific selector (all zeros for odd `d`, half
//!   zeros half ones for even `d`) reduces to a Vandermonde matrix on
//!   distinct roots of unity, which pins its determinant magnitude in closed
//!   form and makes the full-rank certificate checkable against an exact
//!   target.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::coin::CoinMatrix;
use crate::error::{Error, Result};
use crate::evolve::{dense_operator, step};
use crate::momentum::{constant_eigenvalue_scan, ConstancyReport};
use crate::state::LatticeState;
use crate::types::{Dimension, SubmatrixSelector};

/// Relative tolerance for numerical rank decisions.
pub const RANK_TOL: f64 = 1e-10;
/// Relative singular-value threshold below which a direction counts as
/// nullspace.
pub const NULLSPACE_TOL: f64 = 1e-10;
/// Allowed disagreement between a certificate determinant and its closed
/// form.
pub const CERTIFICATE_DET_TOL: f64 = 1e-9;
/// Residual bound a localization witness must satisfy.
pub const WITNESS_RESIDUAL_TOL: f64 = 1e-9;
/// Selector sweeps are capped at `2^d <= 2^20`.
pub const SELECTOR_SWEEP_LIMIT: u128 = 1 << 20;

/// A `d x d` coin submatrix `C^(l)` with entries `c_{2j+l_j, 2k+l_k}`,
/// together with its singular values and numerical rank.
#[derive(Debug, Clone, Serialize)]
pub struct CoinSubmatrix {
    #[serde(rename = "ell")]
    pub selector: SubmatrixSelector,
    #[serde(skip)]
    pub matrix: DMatrix<Complex64>,
    /// Singular values in descending order.
    pub singular_values: Vec<f64>,
    /// Count of singular values above `RANK_TOL * max(sigma_max, 1)`.
    pub rank: usize,
}

/// Extracts `C^(l)` and computes its singular values and rank.
///
/// The submatrix entries are bit-identical copies of the coin entries.
pub fn coin_submatrix(coin: &CoinMatrix, selector: &SubmatrixSelector) -> Result<CoinSubmatrix> {
    let d = coin.d();
    if selector.dim() != d.get() {
        return Err(Error::DimensionMismatch {
            context: "selector versus coin",
            got: selector.dim(),
            expected: d.get(),
        });
    }
    let indices = selector.indices();
    let matrix = DMatrix::from_fn(d.get(), d.get(), |j, k| coin.entry(indices[j], indices[k]));
    let singular_values = singular_values_desc(&matrix);
    let rank = numerical_rank(&singular_values, RANK_TOL);
    Ok(CoinSubmatrix {
        selector: selector.clone(),
        matrix,
        singular_values,
        rank,
    })
}

/// Singular values of a complex matrix, descending.
pub fn singular_values_desc(m: &DMatrix<Complex64>) -> Vec<f64> {
    let mut svs: Vec<f64> = m
        .clone()
        .svd_unordered(false, false)
        .singular_values
        .iter()
        .copied()
        .collect();
    svs.sort_by(|a, b| b.total_cmp(a));
    svs
}

/// Numerical rank: the number of singular values above
/// `tol * max(sigma_max, 1)`.
pub fn numerical_rank(singular_values: &[f64], tol: f64) -> usize {
    let scale = singular_values.first().copied().unwrap_or(0.0).max(1.0);
    singular_values.iter().filter(|&&s| s > tol * scale).count()
}

/// Conclusion of the all-selectors rank sweep.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "conclusion")]
pub enum NecessaryConditionConclusion {
    /// Some `C^(l)` has full rank `d`: localization is impossible.
    NoLocalization { witness: SubmatrixSelector },
    /// Every submatrix is rank-deficient. The necessary condition for
    /// localization holds, which decides nothing by itself.
    Inconclusive,
}

/// Result of evaluating all `2^d` selectors.
#[derive(Debug, Clone, Serialize)]
pub struct NecessaryConditionReport {
    pub rank_table: Vec<CoinSubmatrix>,
    #[serde(flatten)]
    pub conclusion: NecessaryConditionConclusion,
}

/// Evaluates `coin_submatrix` for every selector in lexicographic order.
///
/// The witness, when one exists, is the first full-rank selector in that
/// order.
pub fn necessary_condition_test(coin: &CoinMatrix) -> Result<NecessaryConditionReport> {
    let d = coin.d();
    let sweep = 1u128.checked_shl(d.get() as u32).unwrap_or(u128::MAX);
    if sweep > SELECTOR_SWEEP_LIMIT {
        return Err(Error::ResourceGuard {
            what: "selector sweep",
            required: sweep,
            limit: SELECTOR_SWEEP_LIMIT,
            unit: "selectors",
        });
    }
    let mut rank_table = Vec::with_capacity(sweep as usize);
    let mut witness: Option<SubmatrixSelector> = None;
    for selector in SubmatrixSelector::enumerate(d) {
        let sub = coin_submatrix(coin, &selector)?;
        if sub.rank == d.get() && witness.is_none() {
            witness = Some(selector);
        }
        rank_table.push(sub);
    }
    let conclusion = match witness {
        Some(witness) => NecessaryConditionConclusion::NoLocalization { witness },
        None => NecessaryConditionConclusion::Inconclusive,
    };
    Ok(NecessaryConditionReport {
        rank_table,
        conclusion,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    Odd,
    Even,
}

/// A full-rank certificate for the Fourier coin in dimension `d`.
#[derive(Debug, Clone, Serialize)]
pub struct FourierCertificate {
    pub d: Dimension,
    pub parity: Parity,
    #[serde(rename = "ell")]
    pub selector: SubmatrixSelector,
    pub rank: usize,
    pub det_magnitude: f64,
    pub expected_det_magnitude: f64,
}

/// Closed-form `|det C^(l)|` for the certified Fourier selector.
///
/// Odd `d`: the selected rows are a permutation of the size-`d` DFT rows, so
/// the magnitude is `d^{d/2} / (2d)^{d/2} = 2^{-d/2}`. Even `d`: the selector
/// reduces to the Vandermonde matrix on the nodes `w^0, ..., w^{d-1}` with
/// `w = exp(2 pi i / (2d))`, whose determinant magnitude is the pairwise node
/// distance product, scaled by `(2d)^{-d/2}`. Row and column permutations
/// only flip the determinant sign, so magnitudes compare exactly.
pub fn fourier_expected_det_magnitude(d: Dimension) -> f64 {
    let n = d.get();
    if n % 2 == 1 {
        2.0f64.powf(-(n as f64) / 2.0)
    } else {
        let order = 2 * n;
        let mut product = 1.0;
        for i in 0..n {
            for j in (i + 1)..n {
                let zi =
                    Complex64::from_polar(1.0, std::f64::consts::TAU * i as f64 / order as f64);
                let zj =
                    Complex64::from_polar(1.0, std::f64::consts::TAU * j as f64 / order as f64);
                product *= (zi - zj).norm();
            }
        }
        product / (order as f64).powf(n as f64 / 2.0)
    }
}

/// Builds the Fourier coin for `d`, extracts the parity-specific selector
/// (all zeros for odd `d`, half zeros then half ones for even `d`), and
/// checks full rank plus the closed-form determinant magnitude.
///
/// A failed check is reported as an internal-consistency error: it would
/// contradict an identity of the Fourier coin itself.
pub fn fourier_certificate(d: Dimension) -> Result<FourierCertificate> {
    let coin = CoinMatrix::fourier(d);
    let (parity, selector) = if d.get() % 2 == 1 {
        (Parity::Odd, SubmatrixSelector::all_zeros(d))
    } else {
        (Parity::Even, SubmatrixSelector::half_split(d)?)
    };
    let sub = coin_submatrix(&coin, &selector)?;
    if sub.rank != d.get() {
        return Err(Error::InternalConsistency(format!(
            "fourier certificate: rank(C^({selector})) = {} < d = {d}",
            sub.rank
        )));
    }
    let det_magnitude = sub.matrix.determinant().norm();
    let expected_det_magnitude = fourier_expected_det_magnitude(d);
    if (det_magnitude - expected_det_magnitude).abs() >= CERTIFICATE_DET_TOL {
        return Err(Error::InternalConsistency(format!(
            "fourier certificate: |det| = {det_magnitude:.12e} differs from closed form {expected_det_magnitude:.12e}"
        )));
    }
    Ok(FourierCertificate {
        d,
        parity,
        selector,
        rank: sub.rank,
        det_magnitude,
        expected_det_magnitude,
    })
}

/// Outcome of a truncated finite-support eigenvector search.
#[derive(Debug, Clone)]
pub struct EigenvectorSearchResult {
    pub lambda: Complex64,
    pub radius: usize,
    pub nullspace_dimension: usize,
    /// Orthonormal basis of the numerical nullspace, as lattice states
    /// supported in the radius box.
    pub basis: Vec<LatticeState>,
    /// Position-space residuals `|U psi - lambda psi| / |psi|`, one per basis
    /// state, computed with the matrix-free step as a cross-check.
    pub residuals: Vec<f64>,
}

/// Searches for eigenvectors of `U` with eigenvalue `lambda` supported in the
/// centered L-infinity box of the given radius.
///
/// Builds `A = U_box - lambda P`, where `U_box` maps the radius box into the
/// radius+1 box and `P` is the inclusion, and returns the right singular
/// vectors with singular value below `NULLSPACE_TOL * sigma_max`. A state
/// supported in the box satisfies `U psi = lambda psi` exactly if and only if
/// its coordinate vector is annihilated by `A`, so a nonempty basis is a
/// sound localization witness; an empty one only rules this box out.
///
/// Space homogeneity lets any finite-support eigenvector be translated into a
/// centered box of sufficient radius, so centering loses no generality.
pub fn finite_support_eigenvector_search(
    coin: &CoinMatrix,
    lambda: Complex64,
    radius: usize,
) -> Result<EigenvectorSearchResult> {
    if (lambda.norm() - 1.0).abs() >= 1e-6 {
        return Err(Error::OffUnitCircle {
            modulus: lambda.norm(),
        });
    }
    let op = dense_operator(coin, radius)?;
    let mut a = op.matrix().clone();
    let m = coin.internal_dim();
    for s in 0..op.source().site_count() {
        let pos = op.source().position_of(s);
        for chi in 0..m {
            let row = op
                .target()
                .index_of(&pos, chi)
                .expect("source box lies inside target box");
            a[(row, s * m + chi)] -= lambda;
        }
    }

    // Values-only pass first; the basis is only extracted when the nullspace
    // is nonempty.
    let values = singular_values_desc(&a);
    let sigma_max = values.first().copied().unwrap_or(0.0);
    let threshold = NULLSPACE_TOL * sigma_max;
    let nullspace_dimension = values.iter().filter(|&&s| s < threshold).count();
    if nullspace_dimension == 0 {
        return Ok(EigenvectorSearchResult {
            lambda,
            radius,
            nullspace_dimension: 0,
            basis: Vec::new(),
            residuals: Vec::new(),
        });
    }

    let svd = a.svd(false, true);
    let v_adjoint = svd.v_t.expect("requested right singular vectors");
    let mut basis = Vec::with_capacity(nullspace_dimension);
    let mut residuals = Vec::with_capacity(nullspace_dimension);
    for (i, &sigma) in svd.singular_values.iter().enumerate() {
        if sigma >= threshold {
            continue;
        }
        // Column i of V is the conjugate of row i of V^H.
        let vector = v_adjoint.row(i).transpose().map(|z| z.conj());
        let state = op.source().state_from_vector(&vector)?;
        let moved = step(&state, coin)?;
        let difference = LatticeState::linear_combination(&[
            (Complex64::new(1.0, 0.0), &moved),
            (-lambda, &state),
        ])?;
        residuals.push(difference.norm() / state.norm());
        basis.push(state);
    }
    debug_assert_eq!(basis.len(), nullspace_dimension);
    Ok(EigenvectorSearchResult {
        lambda,
        radius,
        nullspace_dimension,
        basis,
        residuals,
    })
}

/// Verdict status of the combined decision procedure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictStatus {
    NoLocalization,
    Localization,
    Unknown,
}

/// The certifying object behind a verdict.
#[derive(Debug, Clone)]
pub enum Witness {
    /// A selector whose coin submatrix has full rank `d`.
    FullRankSelector(SubmatrixSelector),
    /// A finite-support eigenvector together with its eigenvalue.
    Eigenvector {
        lambda: Complex64,
        state: LatticeState,
        residual: f64,
    },
}

/// Summary of one truncated search performed by [`decide`].
#[derive(Debug, Clone, Serialize)]
pub struct SearchSummary {
    #[serde(with = "crate::serde_complex")]
    pub lambda: Complex64,
    pub radius: usize,
    pub nullspace_dimension: usize,
}

/// Everything [`decide`] learned about a coin.
#[derive(Debug, Clone)]
pub struct LocalizationVerdict {
    pub status: VerdictStatus,
    pub witness: Option<Witness>,
    /// Rank table over all selectors, in lexicographic selector order.
    pub rank_table: Vec<CoinSubmatrix>,
    /// Constancy scan evidence; absent when the rank test already decided.
    pub scan: Option<ConstancyReport>,
    /// Truncated searches performed, in execution order.
    pub searches: Vec<SearchSummary>,
}

/// Grid and tolerance for the scan stage of [`decide`].
#[derive(Debug, Clone, Copy)]
pub struct ScanParams {
    pub grid: usize,
    pub tol: f64,
}

impl Default for ScanParams {
    fn default() -> Self {
        Self {
            grid: crate::momentum::DEFAULT_SCAN_GRID,
            tol: crate::momentum::DEFAULT_SCAN_TOL,
        }
    }
}

/// Runs the decision pipeline.
///
/// 1. The all-selectors rank test. Any full-rank submatrix settles the
///    question: no localization.
/// 2. Otherwise a constant-eigenvalue scan collects candidate eigenvalues.
/// 3. Each constant candidate, in canonical order, is searched for
///    finite-support eigenvectors with radii `0..=radius_budget`; the first
///    nonempty nullspace yields a localization witness.
///
/// Anything else is reported as unknown with all evidence attached. An empty
/// search never converts into a no-localization claim; only the rank test
/// can certify absence.
pub fn decide(
    coin: &CoinMatrix,
    scan_params: ScanParams,
    radius_budget: usize,
) -> Result<LocalizationVerdict> {
    let report = necessary_condition_test(coin)?;
    if let NecessaryConditionConclusion::NoLocalization { witness } = &report.conclusion {
        return Ok(LocalizationVerdict {
            status: VerdictStatus::NoLocalization,
            witness: Some(Witness::FullRankSelector(witness.clone())),
            rank_table: report.rank_table,
            scan: None,
            searches: Vec::new(),
        });
    }

    let scan = constant_eigenvalue_scan(coin, scan_params.grid, scan_params.tol)?;
    let mut searches = Vec::new();
    for candidate in &scan.constant_eigenvalues {
        for radius in 0..=radius_budget {
            let result = finite_support_eigenvector_search(coin, candidate.lambda, radius)?;
            searches.push(SearchSummary {
                lambda: candidate.lambda,
                radius,
                nullspace_dimension: result.nullspace_dimension,
            });
            if result.nullspace_dimension > 0 {
                let state = result.basis[0].clone();
                let residual = result.residuals[0];
                return Ok(LocalizationVerdict {
                    status: VerdictStatus::Localization,
                    witness: Some(Witness::Eigenvector {
                        lambda: candidate.lambda,
                        state,
                        residual,
                    }),
                    rank_table: report.rank_table,
                    scan: Some(scan),
                    searches,
                });
            }
        }
    }

    Ok(LocalizationVerdict {
        status: VerdictStatus::Unknown,
        witness: None,
        rank_table: report.rank_table,
        scan: Some(scan),
        searches,
    })
}
