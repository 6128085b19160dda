use thiserror::Error;

/// Errors raised anywhere in the expansion pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("index set S_m is undefined for m = 0")]
    EmptyIndexSet,
    #[error("missing {kind} derivative of order {order} (only {available} supplied)")]
    MissingDerivative {
        kind: &'static str,
        order: usize,
        available: usize,
    },
    #[error("expansion order {requested} exceeds the supported maximum {max}")]
    OrderTooLarge { requested: usize, max: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("domain error in {function}: {message}")]
    Domain {
        function: &'static str,
        message: String,
    },
    #[error("quadrature did not converge: estimate {estimate}, error {error}")]
    Quadrature { estimate: f64, error: f64 },
    #[error("singular point at z = {z} (exponent {exponent})")]
    Singular { z: f64, exponent: f64 },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;
