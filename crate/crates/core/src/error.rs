//! Error type shared across the library.

use thiserror::Error;

/// Errors produced by dataset handling and the statistical routines.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// The dataset (or the selected subset) contains no events.
    #[error("no events in dataset")]
    NoEvents,

    /// An input violated a precondition (negative time, mismatched lengths, ...).
    #[error("invalid input: {0}")]
    Invalid(String),

    /// An argument fell outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The variance estimate is zero; no standardized statistic exists.
    #[error("degenerate variance: {0}")]
    DegenerateVariance(String),

    /// A weight scheme came out all-zero (e.g. threshold past the last event).
    #[error("degenerate weights: {0}")]
    DegenerateWeights(String),

    /// A dataset CSV failed to parse; `line` is 1-based (header is line 1).
    #[error("csv parse error at line {line}: {message}")]
    Csv { line: usize, message: String },
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for the two degenerate-analysis variants.
    pub fn is_degenerate(&self) -> bool {
        matches!(
            self,
            Error::DegenerateVariance(_) | Error::DegenerateWeights(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
