use std::path::PathBuf;

use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("gamma function has a pole at {0} (nonpositive integer)")]
    PoleOfGamma(f64),

    #[error("argument must be finite, got {0}")]
    NonFinite(f64),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid pole set: {0}")]
    InvalidPoles(String),

    #[error("invalid filter scales: {0}")]
    InvalidScales(String),

    #[error("moment matrix is ill-conditioned (condition estimate {0:.3e})")]
    IllConditioned(f64),

    #[error("quadrature did not reach tolerance {tolerance:e} (error estimate {estimate:e})")]
    QuadratureFailure { tolerance: f64, estimate: f64 },

    #[error("cutoff must exceed 1, got {0}")]
    InvalidCutoff(f64),

    #[error("schedule parameter m = {m} must exceed s_0 - s_k = {gap}")]
    ScheduleViolation { m: f64, gap: f64 },

    #[error("need at least {needed} usable results, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("{path}:{line}: {reason}")]
    Parse {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("spectrum is empty")]
    EmptySpectrum,

    #[error("eigenvalue {0} is not strictly positive")]
    NonpositiveEigenvalue(f64),

    #[error("{path}: {reason}")]
    Io { path: PathBuf, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
