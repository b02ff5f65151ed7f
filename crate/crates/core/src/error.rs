use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A density, derivative or state value that is NaN or otherwise unusable.
    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    /// Chain trace, pools and partition disagree about regions.
    #[error("consistency error: {0}")]
    Consistency(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("region {region} has zero probability mass")]
    ZeroMassRegion { region: usize },

    /// Exact enumeration refused because the instance is too large.
    #[error("enumeration too large: {what} = {value} exceeds limit {limit}")]
    TooLarge {
        what: &'static str,
        value: usize,
        limit: usize,
    },

    #[error(
        "gradient descent did not converge after {iterations} iterations \
         (gradient norm {gradient_norm:.3e}, tolerance {tolerance:.1e})"
    )]
    NonConvergence {
        iterations: usize,
        gradient_norm: f64,
        tolerance: f64,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}
