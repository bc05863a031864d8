use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("expected a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("matrix is not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPositive(f64),

    #[error("trace is {0}, expected 1")]
    BadTrace(f64),

    #[error("vector norm is {0}, expected 1")]
    NotNormalized(f64),

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("invalid priors: {0}")]
    InvalidPriors(String),

    #[error("Kraus operators are not trace preserving (defect {0:.3e})")]
    NotTracePreserving(f64),

    #[error("matrix is not unitary (defect {0:.3e})")]
    NotUnitary(f64),

    #[error("infeasible target: output overlap {output} is below input overlap {input}")]
    InfeasibleTarget { input: f64, output: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("construction failed verification: {0}")]
    Verification(String),

    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
