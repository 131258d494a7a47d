use thiserror::Error;

/// Errors raised by the optimizer library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid architecture: {0}")]
    Architecture(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid parameter `{name}`: {reason}")]
    Param { name: &'static str, reason: String },
    #[error("singular system in {0}")]
    Singular(&'static str),
    #[error("non-finite value in block `{block}` at iteration {iter}")]
    NonFinite { block: &'static str, iter: usize },
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Error {
    Error::Param {
        name,
        reason: reason.into(),
    }
}
