//! Error type shared across the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on `{path}`: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error in `{path}`: {message}")]
    Csv { path: String, message: String },

    #[error("invalid dataset: {0}")]
    InvalidData(String),

    #[error("class count < 2")]
    TooFewClasses,

    #[error("class `{name}` has {count} samples, fewer than {folds} folds")]
    ClassSmallerThanFolds {
        name: String,
        count: usize,
        folds: usize,
    },

    #[error("vector length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("empty class group")]
    EmptyGroup,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("coding matrix generation failed: {0}")]
    MatrixGeneration(String),

    #[error("column {column} is degenerate: surviving training targets have a single sign")]
    DegenerateColumn { column: usize },

    #[error("kernel system is numerically singular at ridge_lambda = 0; set ridge_lambda > 0")]
    SingularKernel,

    #[error("model format error: {0}")]
    ModelFormat(String),
}
