use thiserror::Error;

/// Errors raised by the laboratory.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not Hermitian (max asymmetry {asymmetry:e}, tolerance {tolerance:e})")]
    NotHermitian { asymmetry: f64, tolerance: f64 },

    #[error("state is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("trace is not one (got {trace})")]
    InvalidTrace { trace: f64 },

    #[error("rank {rank} out of range for dimension {dim}")]
    InvalidRank { rank: usize, dim: usize },

    #[error("non-finite entry in input")]
    NonFinite,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("basis size {size} exceeds configured cap {cap}")]
    MemoryCap { size: usize, cap: usize },

    #[error("truncation edge mass {edge_mass:e} exceeds threshold {threshold:e}")]
    Truncation { edge_mass: f64, threshold: f64 },

    #[error("grid too coarse: spacing {spacing} exceeds Nyquist bound {max_spacing}; use at most {max_spacing}")]
    GridTooCoarse { spacing: f64, max_spacing: f64 },

    #[error("spectrum mass {mass:e} near the Nyquist band exceeds {threshold:e}")]
    Aliasing { mass: f64, threshold: f64 },

    #[error("field does not decay at the grid boundary (boundary mass {mass:e})")]
    NonDecaying { mass: f64 },

    #[error("diffeomorphism Jacobian vanishes on the support (min |{{α,β}}| = {min_jacobian:e})")]
    DegenerateJacobian { min_jacobian: f64 },

    #[error("exponent mismatch: 1/{p} != 1/{q} + 1/{r}")]
    ExponentMismatch { p: f64, q: f64, r: f64 },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
