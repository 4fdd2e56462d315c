use thiserror::Error;

/// Errors raised by the numeric and symbolic layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("enumeration of {count} indices exceeds the guard of {limit}")]
    TooMany { count: usize, limit: usize },

    #[error("numerical abort at t = {t}: {reason}")]
    Numerical { t: f64, reason: String },

    #[error("divisor {index} is {value:e}, below the refusal floor {floor:e}")]
    NearZeroDivisor {
        index: String,
        value: f64,
        floor: f64,
    },

    #[error("structure violation: {0}")]
    Structure(String),

    #[error("sampling failure: {0}")]
    Sampling(String),
}

pub type Result<T> = std::result::Result<T, Error>;
