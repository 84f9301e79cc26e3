//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by any part of the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("latitude {0} outside [-90, 90]")]
    LatitudeRange(f64),
    #[error("longitude {0} outside [-180, 180]")]
    LongitudeRange(f64),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("unknown semantic label `{0}`")]
    UnknownLabel(String),
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("mismatched inputs: {0}")]
    Mismatch(String),
    #[error("training split for fold {fold} is empty")]
    EmptyTrainingSplit { fold: usize },
    #[error("grid of {cells} cells exceeds the {budget}-cell budget; use a larger cell size")]
    CellBudget { cells: u64, budget: u64 },
    #[error("model file: {0}")]
    Model(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code for this error: 1 for validation/input problems,
    /// 2 for runtime failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io(_) => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
