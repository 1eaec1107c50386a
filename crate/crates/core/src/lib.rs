//! Simulation and verification of quantum teleportation with generalized
//! Bell states on qudits of arbitrary dimension `d >= 2`.
//!
//! The crate is organized bottom-up:
//!
//! * [`tensor`]: dense complex vectors and matrices, tensor products,
//!   partial trace and fidelity.
//! * [`eigen`]: cyclic Jacobi eigensolver for Hermitian matrices with
//!   explicit eigenspace grouping ([`eigen::SpectralForm`]).
//! * [`bell`]: the generalized Bell basis and the product-to-Bell expansion.
//! * [`weyl`]: Pauli and Weyl (shift/clock) operators, canonical Weyl words
//!   and the Bell-diagonal measurement observable.
//! * [`measurement`]: Born-rule sampling with Lüders reduction.
//! * [`teleport`]: the protocol itself, correction tables and the
//!   degenerate-observable demonstration.
//! * [`verify`]: named identity checks used by the `gbt verify` command.
//! * [`cli`]: the `gbt` command-line front end.

pub mod bell;
pub mod cli;
pub mod eigen;
pub mod error;
pub mod measurement;
pub mod teleport;
pub mod tensor;
pub mod verify;
pub mod weyl;

pub use error::{GbtError, Result};
pub use tensor::{CNum, DensityMat, OperatorMat, StateVec};

/// Numerical tolerances shared by every module.
pub mod tol {
    /// State normalization and trace-one checks.
    pub const TOL_NORM: f64 = 1e-12;
    /// Matrix identities: Hermiticity, unitarity, reconstruction.
    pub const TOL_MAT: f64 = 1e-10;
    /// Eigenvalues closer than this are merged into one eigenspace.
    pub const GROUP_TOL: f64 = 1e-8;
    /// Amplitudes below this magnitude are skipped when fixing a global phase.
    pub const PHASE_TOL: f64 = 1e-9;
    /// Born probabilities below this are treated as exactly zero when sampling.
    pub const PROB_ZERO: f64 = 1e-14;
    /// A teleportation run succeeds when its fidelity exceeds `1 - FIDELITY_TOL`.
    pub const FIDELITY_TOL: f64 = 1e-9;
}
