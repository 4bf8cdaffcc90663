//! Quantum and classical precision limits for estimating the concentration of
//! a chiral solution probed with bright Gaussian light.
//!
//! The crate is organised bottom-up:
//!
//! - [`gaussian`]: two-mode Gaussian states in the complex mode ordering
//!   `(a1, a2, a1†, a2†)` with vacuum-normalised covariance (vacuum = identity).
//! - [`channels`]: circular birefringence, circular dichroism and external loss
//!   acting on Gaussian states, driven by a [`channels::ChiralSample`].
//! - [`metrology`]: quantum Fisher information (general two-mode formula and
//!   closed forms), detection-scheme statistics and Cramér–Rao bound chains.
//! - [`fock`]: an independent truncated number-state oracle used to validate the
//!   Gaussian fast path.
//! - [`montecarlo`]: seeded measurement simulation and concentration estimators.
//! - [`validate`]: the oracle cross-validation grid and the discrepancy report.

pub mod channels;
pub mod error;
pub mod fock;
pub mod gaussian;
pub mod metrology;
pub mod montecarlo;
pub mod probe;
pub mod validate;

pub use error::{Error, Result};
pub use gaussian::{GaussianState, ModeLabels};
pub use probe::{ProbeFamily, ProbeSpec};

/// Complex scalar used throughout the crate.
pub type C64 = num_complex::Complex64;
