use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("empty dataset")]
    EmptyDataset,

    #[error("expected exactly two label values, found {found}")]
    LabelClasses { found: usize },

    #[error("class {label} has {count} samples, fewer than required {required}")]
    ClassTooSmall {
        label: i8,
        count: usize,
        required: usize,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The hard-margin problem has no separating hyperplane; `max_slack` is the
    /// largest slack the penalized solve needed.
    #[error("data are not linearly separable (max slack {max_slack:.3e})")]
    NotSeparable { max_slack: f64 },

    #[error("weight vector is zero; geometric margin undefined")]
    ZeroWeightVector,

    #[error("model format: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
