use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("gamma function pole at x = {0}")]
    Pole(f64),
    #[error("overflow: {0}")]
    Overflow(String),
    #[error("convergence failure: {0}")]
    Convergence(String),
    #[error("truncation failure: {0}")]
    Truncation(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("invalid precision: {0}")]
    Precision(String),
}

pub type Result<T> = std::result::Result<T, Error>;
