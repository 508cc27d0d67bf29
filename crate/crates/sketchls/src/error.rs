//! Error type shared by all library modules.

/// Library-wide error enum.
///
/// `InvalidInput` covers precondition violations (dimension mismatches,
/// out-of-range parameters, non-finite data). `Numeric` covers runtime
/// numerical failures such as factorization non-convergence or rank collapse
/// where a larger sketch is needed.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

pub(crate) fn numeric(msg: impl Into<String>) -> Error {
    Error::Numeric(msg.into())
}
