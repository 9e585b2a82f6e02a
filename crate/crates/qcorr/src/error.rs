//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by state constructors, decompositions and solvers.
#[derive(Debug, Error)]
pub enum Error {
    /// Matrix dimensions are inconsistent with the requested operation.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A parameter is outside its admissible range.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Input that must be Hermitian is not, beyond tolerance.
    #[error("matrix is not Hermitian (defect {defect:.3e}, tolerance {tol:.3e})")]
    NotHermitian { defect: f64, tol: f64 },

    /// Input that must be a density matrix fails trace/positivity checks.
    #[error("not a density matrix: {0}")]
    NotDensityMatrix(String),

    /// An operator expected to have negative partial-transpose spectrum has none.
    #[error("state has positive partial transpose; no negativity witness exists")]
    PptState,

    /// An iterative solver exhausted its budget before reaching tolerance.
    #[error("{solver} did not converge: residual {residual:.3e} after {iterations} iterations")]
    NonConvergence {
        solver: &'static str,
        residual: f64,
        iterations: usize,
    },

    /// A proved inequality was violated beyond numerical tolerance.
    #[error("bound violation: {context} (margin {margin:.3e})")]
    BoundViolation { context: String, margin: f64 },

    /// Malformed serialized input.
    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
