use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("division by the zero polynomial")]
    ZeroDivisor,

    #[error("root finding did not converge after {iterations} iterations")]
    RootsNotConverged { iterations: usize },

    #[error("operation needs a nonzero polynomial")]
    ZeroPolynomial,

    #[error("the zero loop has no genus")]
    ZeroLoop,

    #[error("invalid loop: {0}")]
    InvalidLoop(String),

    #[error("invalid filter bank: {0}")]
    InvalidFilter(String),

    #[error("matrix is not an orthogonal projection (residual {residual:.3e})")]
    NotProjection { residual: f64 },

    #[error("matrix is not unitary (residual {residual:.3e})")]
    NotUnitary { residual: f64 },

    #[error("factorization failed: residual {residual:.3e}")]
    FactorizationFailed { residual: f64 },

    #[error("coefficient sequence must have even length, got {0}")]
    OddLength(usize),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("index ({k}, {l}) out of range for genus {g}")]
    IndexOutOfRange { k: usize, l: usize, g: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("numerical rank is ambiguous; singular values in the gray zone: {singular_values:?}")]
    RankAmbiguous { singular_values: Vec<f64> },

    #[error("no positive fixed density found (residual {residual:.3e})")]
    NoFixedDensity { residual: f64 },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
