use thiserror::Error;

/// Errors raised by the numerical layer.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A constraint between problem ingredients is violated (for example the
    /// reaction exponent is not strictly below the lower growth index).
    #[error("validation failed: {0}")]
    Validation(String),

    /// An algorithm observed data contradicting one of its preconditions,
    /// e.g. a modular that increases along a ray.
    #[error("internal consistency: {0}")]
    Consistency(String),

    #[error("mesh mismatch: function has {got} values, mesh has {expected} cells")]
    MeshMismatch { expected: usize, got: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
