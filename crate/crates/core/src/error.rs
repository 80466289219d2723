use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("flux singularity: |cos(2π Φx/Φ0)| = {cos:.3e} below floor {floor:.1e} at Φx/Φ0 = {flux_over_phi0}")]
    FluxSingularity { flux_over_phi0: f64, cos: f64, floor: f64 },

    #[error("circuit parameter `{name}` must be strictly positive and finite, got {value}")]
    NonPositiveParam { name: &'static str, value: f64 },

    #[error("coupled compilation requires the second-device block")]
    MissingSecondDevice,

    #[error("B matrix is singular or ill-conditioned (condition number {condition:.3e})")]
    SingularBMatrix { condition: f64 },

    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("truncation retains only {retained:.6} of the state norm (threshold {threshold})")]
    Truncation { retained: f64, threshold: f64 },

    #[error("norm drifted to {norm:.12} at t = {t:.6e} s (tolerance {tolerance:.1e})")]
    NormDrift { norm: f64, t: f64, tolerance: f64 },

    #[error("not a density matrix: {0}")]
    NotADensityMatrix(String),

    #[error("measurement unitary of dimension {dim} needs {expected} angles, got {found}")]
    BadAngleCount { dim: usize, expected: usize, found: usize },

    #[error("trajectory spans {found} complete drive period(s); at least 2 are required")]
    TooFewPeriods { found: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } | Error::InvalidArgument(_) | Error::MissingSecondDevice => 2,
            Error::NonPositiveParam { .. } => 2,
            Error::Io { .. } => 4,
            _ => 3,
        }
    }
}
