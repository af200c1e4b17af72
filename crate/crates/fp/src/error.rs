use thiserror::Error;

/// Errors surfaced by the scalar float operations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FpError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("iterated operation over an empty list")]
    EmptyInput,
    #[error("operation outside its domain: {0}")]
    DomainError(&'static str),
    #[error("malformed encoding: {0}")]
    MalformedEncoding(String),
    #[error("unsupported precision {0} (must be in 2..={1})")]
    BadPrecision(u32, u32),
}

pub type FpResult<T> = Result<T, FpError>;
