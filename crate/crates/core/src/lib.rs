//! Discrete-time coined quantum walks on the integer lattice `Z^d`.
//!
//! A walk is driven by a unitary `2d x 2d` coin acting on the internal
//! (chirality) components at every site, followed by a shift moving component
//! `2j` one step in `-e_j` and component `2j+1` in `+e_j`. The crate provides
//!
//! - sparse position-space evolution with exact support tracking and
//!   return-probability time series ([`evolve`]),
//! - the momentum-space operator `U(k)` and Brillouin-zone scans for
//!   `k`-independent eigenvalues ([`momentum`]),
//! - localization certificates: coin-submatrix rank tests, Fourier-walk
//!   determinant certificates, a truncated finite-support eigenvector search,
//!   and a combined decision pipeline ([`localization`]).
//!
//! Coin matrices and states travel as JSON documents; see [`coin`] and
//! [`state`] for the schemas. All values are immutable after construction and
//! every operation is a pure function, safe to call concurrently.

pub mod coin;
pub mod error;
pub mod evolve;
pub mod localization;
pub mod momentum;
pub mod state;
pub mod types;

pub(crate) mod serde_complex;

pub use coin::CoinMatrix;
pub use error::{Error, Result};
pub use state::LatticeState;
pub use types::{ChiralityIndex, Dimension, Position, SubmatrixSelector};
