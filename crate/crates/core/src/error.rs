use thiserror::Error;

use crate::gaussian::ModeLabels;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("state carries {found:?} mode labels, operation requires {expected:?}")]
    LabelMismatch { expected: ModeLabels, found: ModeLabels },

    #[error("concentration unit {found} cannot be used for {context}")]
    UnitMismatch {
        found: &'static str,
        context: &'static str,
    },

    #[error("covariance matrix is singular (det = {0:e})")]
    SingularCovariance(f64),

    #[error("transmission T = {0:e} is degenerate (must lie in (0, 1])")]
    DegenerateTransmission(f64),

    #[error("concentration cannot be estimated: {0}")]
    EstimationImpossible(String),

    #[error("operating point is not invertible: d<mean>/dC = {0:e}")]
    NonInvertible(f64),

    #[error("zero-count arm in trial {0}")]
    ZeroCount(usize),

    #[error("Monte Carlo plans must carry an explicit seed")]
    Unseeded,

    #[error("truncation leak {leak:e} exceeds tolerance {tol:e} at cutoff {cutoff}")]
    TruncationLeak { leak: f64, tol: f64, cutoff: usize },

    #[error("{0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_finite(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: format!("must be finite, got {value}"),
        })
    }
}
