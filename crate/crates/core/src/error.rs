use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Input outside the problem's box bounds, or of the wrong dimension.
    #[error("domain error: {0}")]
    Domain(String),
    /// Non-finite or otherwise unusable training data.
    #[error("data error: {0}")]
    Data(String),
    /// Factorization failed even after jitter escalation.
    #[error("numerical error: {0}")]
    Numerical(String),
    /// A requested resource (e.g. a reference front) does not exist.
    #[error("unavailable: {0}")]
    Unavailable(String),
    #[error("invalid argument: {0}")]
    Argument(String),
}
