use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Dimension triple or spike strength outside the supported envelope.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// An argument outside the operation's domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// Cancellation or range trouble that would make the returned value untrustworthy.
    #[error("numerical instability at x = {x}: {detail}")]
    NumericalInstability { x: f64, detail: String },

    #[error("matrix is not positive definite (pivot {pivot} at index {index})")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error("{what} did not converge after {iterations} iterations")]
    NoConvergence { what: &'static str, iterations: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
