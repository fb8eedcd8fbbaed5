use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian: residual {residual:e} exceeds {limit:e}")]
    NotHermitian { residual: f64, limit: f64 },

    #[error("non-positive eigenvalue: min {min:e}, max {max:e}")]
    NonPositiveEigenvalue { min: f64, max: f64 },

    #[error("invalid eigenvalue range [{min}, {max}]")]
    InvalidRange { min: f64, max: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("tensor dimension {dim} exceeds cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("finite-difference step {step:e} leaves the positive cone")]
    StepTooLarge { step: f64 },

    #[error("trace has imaginary residue {imag:e} (real part {real:e})")]
    ImaginaryResidue { real: f64, imag: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown check `{0}`")]
    UnknownCheck(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
