use tcvar_fp::FpError;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("up-interpolation cannot shrink ({0}x{1} -> {2}x{3})")]
    ShrinkNotSupported(usize, usize, usize, usize),
    #[error("kernel does not fit the feature map")]
    KernelTooLarge,
    #[error("token index {0} outside the codebook (size {1})")]
    IndexOutOfRange(usize, usize),
    #[error("attention row sum rounded to zero")]
    RowSumZero,
    #[error("config error: {0}")]
    Config(String),
    #[error("input stream exhausted: {0}")]
    InputsExhausted(&'static str),
    #[error(transparent)]
    Fp(#[from] FpError),
}

pub type ModelResult<T> = Result<T, ModelError>;
