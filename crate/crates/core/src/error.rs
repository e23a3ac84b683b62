use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid attribute vector: {0}")]
    InvalidAttribute(String),

    /// The estimand (or estimate) has no value on this input, e.g. an empty
    /// attribute group or a zero denominator.
    #[error("undefined: {0}")]
    Undefined(String),

    #[error("domain error: {0}")]
    Domain(String),

    /// Target moments cannot be realised; the message names the binding bound.
    #[error("infeasible targets: {0}")]
    Infeasible(String),

    #[error("Newton iteration did not converge after {iterations} iterations (max relative residual {max_residual:.3e}, residuals {residuals:?})")]
    NotConverged {
        iterations: usize,
        max_residual: f64,
        residuals: Vec<f64>,
    },

    #[error("latent correlation matrix cannot be repaired: {0}")]
    NotPositiveDefinite(String),

    #[error("invalid sampler configuration: {0}")]
    Sampler(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn is_undefined(&self) -> bool {
        matches!(self, Error::Undefined(_))
    }
}
