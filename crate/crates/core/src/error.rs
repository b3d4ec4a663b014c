use thiserror::Error;

/// Errors raised by constructions, verifiers and file handling.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// Arguments violate an operation's precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// Parameters are well formed but outside what a construction supports.
    #[error("unsupported parameters: {0}")]
    Unsupported(String),
    /// The requested quantity is not defined for these parameters.
    #[error("not applicable: {0}")]
    NotApplicable(String),
    /// An imported base design is missing or fails its own claims.
    #[error("fixture error: {0}")]
    Fixture(String),
    /// A design file is malformed or violates the schema.
    #[error("schema error: {0}")]
    Schema(String),
    /// A construction produced a design that failed re-verification.
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

pub(crate) fn unsupported(msg: impl Into<String>) -> Error {
    Error::Unsupported(msg.into())
}

pub(crate) fn schema(msg: impl Into<String>) -> Error {
    Error::Schema(msg.into())
}
