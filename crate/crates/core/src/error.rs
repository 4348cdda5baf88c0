//! Crate-wide error type.
//!
//! Numerical preconditions (Hermitian inputs, positive-definite covariances,
//! sorted gains, ...) are enforced at the public API boundary and reported
//! through [`Error`] rather than panics, so that the CLI can map them onto
//! stable exit codes.

use thiserror::Error;

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A generic precondition on an argument was violated.
    #[error("domain error: {0}")]
    Domain(String),

    /// Input matrix is not Hermitian within tolerance.
    #[error("matrix is not Hermitian (max asymmetry {max_asymmetry:.3e})")]
    NotHermitian { max_asymmetry: f64 },

    /// Input matrix has an eigenvalue below the PSD tolerance.
    #[error("matrix is not positive semi-definite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPositiveSemiDefinite { min_eigenvalue: f64 },

    /// Matrix is singular or too ill-conditioned to invert.
    #[error("matrix is singular or near-singular (min eigenvalue {min_eigenvalue:.3e})")]
    Singular { min_eigenvalue: f64 },

    /// Majorization is only defined between equal-sum vectors.
    #[error("vectors are not comparable under majorization (sums {sum_a} vs {sum_b})")]
    NotComparable { sum_a: f64, sum_b: f64 },

    /// Orthogonal pilot construction needs at least as many training symbols
    /// as transmit antennas.
    #[error("insufficient training length: need at least {needed} symbols, got {got}")]
    InsufficientTraining { needed: usize, got: usize },

    /// A Monte-Carlo routine was asked for too few trials to be meaningful.
    #[error("insufficient sampling: {trials} trials requested, minimum is {min}")]
    InsufficientSampling { trials: usize, min: usize },

    /// Invalid experiment or scheme configuration. `line` is set when the
    /// error originates from a config file.
    #[error("config error in `{field}`{}: {message}", line.map(|l| format!(" (line {l})")).unwrap_or_default())]
    Config {
        field: String,
        message: String,
        line: Option<usize>,
    },

    /// A numeric contract was violated at run time (NaN, tripped invariant).
    #[error("numeric contract violation: {0}")]
    Numeric(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
            line: None,
        }
    }

    /// Process exit code used by the command-line frontend.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io(_) => 4,
            Error::Numeric(_) => 3,
            _ => 2,
        }
    }
}
