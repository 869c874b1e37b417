use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the sampling and validation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("size error: {0}")]
    Size(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at row {row}, column `{column}`: {reason}")]
    Parse {
        row: usize,
        column: String,
        reason: String,
    },

    #[error("unknown column `{0}`")]
    UnknownColumn(String),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("samples outside truncation bounds [{lower}, {upper}]: found {value}")]
    OutOfBounds { lower: f64, upper: f64, value: f64 },

    #[error("zero variance in {0}")]
    ZeroVariance(&'static str),

    #[error("singular design matrix (rank {rank} < {columns})")]
    Singular { rank: usize, columns: usize },

    #[error("malformed weight file: {0}")]
    WeightFormat(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
