use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Broad failure class, used by the CLI to choose an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Usage,
    Data,
    Numerical,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("generalized eigenvalue pencil is singular (coincident zeros at index {index})")]
    SingularPencil { index: usize },
    #[error("generalized Schur decomposition failed: {0}")]
    DecompFail(String),
    #[error("system is not stationary (spectral radius {radius:.6})")]
    NonStationary { radius: f64 },
    #[error("Kalman filter diverged at step {step}: {reason}")]
    FilterDiverged { step: usize, reason: String },
    #[error("Riccati recursion did not converge after {iterations} iterations")]
    RiccatiDiverged { iterations: usize },
    #[error("model has no unique stable solution (existence {existence}, uniqueness {uniqueness})")]
    NoUniqueSolution { existence: String, uniqueness: String },

    #[error("parse error in {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("series {series} is missing a value at {date} inside the requested window")]
    MissingInWindow { series: String, date: String },
    #[error("series {series} has a non-positive value {value} at {date}")]
    NonPositive { series: String, date: String, value: f64 },
    #[error("window is too short: {0}")]
    WindowShort(String),
    #[error("every optimizer start returned only sentinel values")]
    AllStartsFailed,
    #[error("baseline sum of squared errors is zero for series {series}")]
    ZeroSse { series: usize },
    #[error("observed variance is zero for series {series}")]
    ZeroVariance { series: usize },
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid argument: {0}")]
    Invalid(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::SingularPencil { .. }
            | Error::DecompFail(_)
            | Error::NonStationary { .. }
            | Error::FilterDiverged { .. }
            | Error::RiccatiDiverged { .. }
            | Error::NoUniqueSolution { .. }
            | Error::AllStartsFailed
            | Error::ZeroSse { .. }
            | Error::ZeroVariance { .. }
            | Error::Degenerate(_) => ErrorClass::Numerical,
            Error::Invalid(_) => ErrorClass::Usage,
            _ => ErrorClass::Data,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
