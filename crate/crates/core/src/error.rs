//! Crate-wide error type.

use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by coin construction, file parsing, state algebra,
/// evolution, and the localization decision machinery.
#[derive(Debug, Error)]
pub enum Error {
    /// The lattice dimension must be a positive integer.
    #[error("lattice dimension must be at least 1, got {0}")]
    InvalidDimension(usize),

    /// Two values that must share a dimension do not.
    #[error("dimension mismatch in {context}: got {got}, expected {expected}")]
    DimensionMismatch {
        context: &'static str,
        got: usize,
        expected: usize,
    },

    /// A coin matrix failed the unitarity check.
    #[error(
        "matrix is not unitary: max |C C\u{2020} - I| = {deviation:.3e} exceeds {tolerance:.1e}"
    )]
    NotUnitary { deviation: f64, tolerance: f64 },

    /// A matrix does not have the 2d x 2d shape required by its declared dimension.
    #[error("matrix has shape {rows}x{cols}, expected {expected}x{expected} for d = {d}")]
    BadShape {
        d: usize,
        rows: usize,
        cols: usize,
        expected: usize,
    },

    /// A document could not be parsed; the message names the offending field.
    #[error("cannot parse {what}: {message}")]
    Parse { what: &'static str, message: String },

    /// An all-zero amplitude vector cannot be normalized.
    #[error("amplitude vector is zero and cannot be normalized")]
    ZeroAmplitude,

    /// A parameter violates an operation precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An eigenvalue handed to the search is not on the unit circle.
    #[error("|lambda| = {modulus} is too far from the unit circle")]
    OffUnitCircle { modulus: f64 },

    /// A computation was rejected before allocating an unreasonable amount of work.
    #[error("resource guard: {what} needs {required} {unit}, limit is {limit}")]
    ResourceGuard {
        what: &'static str,
        required: u128,
        limit: u128,
        unit: &'static str,
    },

    /// The eigenvalue solver did not converge.
    #[error("eigenvalue solver did not converge at k = {k:?}")]
    EigenSolver { k: Vec<f64> },

    /// A result contradicts an identity the implementation is built on.
    #[error("internal consistency violation: {0}")]
    InternalConsistency(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
