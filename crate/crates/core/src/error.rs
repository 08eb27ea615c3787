use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("value {value} at index {index} overflows the register range ±{limit}")]
    Overflow { index: usize, value: f64, limit: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("invalid register format: {0}")]
    InvalidFormat(String),

    #[error("operator is not hermitian: entry ({row}, {col}) has no conjugate partner")]
    NotHermitian { row: usize, col: usize },

    #[error("operator is identically zero")]
    ZeroMatrix,

    #[error("degenerate spectrum bounds: every eigenvalue equals {value}")]
    DegenerateSpectrumBounds { value: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("cluster block {cluster} is not hermitian")]
    NonHermitianBlock { cluster: usize },

    #[error("state is not normalized: |x|^2 = {norm_sq}")]
    UnnormalizedState { norm_sq: f64 },

    #[error("no convergence after {iterations} iterations (last residual {last_residual:e})")]
    MaxIterationsExceeded {
        iterations: usize,
        last_residual: f64,
        residuals: Vec<f64>,
    },

    #[error("operator is singular or numerically singular (contraction estimate {contraction})")]
    SingularOperator { contraction: f64 },

    #[error("operator is not positive definite on [1/kappa, 1]: {0}")]
    NotPositiveDefinite(String),

    #[error("denominator {value:e} is below register resolution")]
    DivisionByNegligible { value: f64 },

    #[error("dimension {dim} exceeds the desk-scale limit {limit}")]
    DimensionTooLarge { dim: usize, limit: usize },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}
