use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not positive definite (pivot {pivot:e} at index {index})")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NonSymmetric(f64),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("column {0} has zero variance")]
    DegenerateColumn(usize),

    #[error("every column of the design has zero variance")]
    AllColumnsDegenerate,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("problem too large for exhaustive enumeration: {0}")]
    TooLarge(String),

    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        row: usize,
        column: usize,
        message: String,
    },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("non-positive value {value} at position {index} under a log transform")]
    NonPositiveValue { index: usize, value: f64 },

    #[error("insufficient history: {0}")]
    InsufficientHistory(String),

    #[error("no records to summarize")]
    Empty,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
