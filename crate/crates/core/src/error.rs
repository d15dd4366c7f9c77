use std::path::PathBuf;

/// Errors produced by the numerical and data routines of this crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// An argument is valid mathematically but outside the supported numerical envelope.
    #[error("range error: {0}")]
    Range(String),

    /// The density implied by the multipliers cannot be normalized.
    #[error("non-normalizable density: {0}")]
    NonNormalizable(String),

    /// Constraint targets admit no MaxEnt solution.
    #[error("no solution: {0}")]
    NoSolution(String),

    #[error("insufficient data: need at least {needed} samples, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("degenerate range: all samples equal {0}")]
    DegenerateRange(f64),

    #[error("empty dataset: {0}")]
    EmptyDataset(String),

    #[error("invalid input: {0}")]
    Validation(String),

    /// No starting point with finite posterior could be found.
    #[error("initialization failed: {0}")]
    Initialization(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }
}
