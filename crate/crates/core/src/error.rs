use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, PsfError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PsfError {
    #[error("matrix must be square, got {rows}x{cols}")]
    NonSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("matrix is not Hermitian (residual {residual:.3e})")]
    NotHermitian { residual: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("operator is not positive semidefinite: eigenvalue {eigenvalue:.3e} below clamp tolerance")]
    NotPositiveSemidefinite { eigenvalue: f64 },

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("plan does not match the operator: {0}")]
    PlanMismatch(String),

    #[error("eigenvalue {eigenvalue} lies on the circle |z| = {radius}")]
    EigenvalueOnCircle { eigenvalue: Complex64, radius: f64 },

    #[error("spectrum is not enclosed: eigenvalue modulus {modulus:.6} >= radius {radius:.6}")]
    SpectrumNotEnclosed { modulus: f64, radius: f64 },

    #[error("function is not finite at {at}")]
    NonFinite { at: Complex64 },

    #[error("resolvent is singular at z = {z}")]
    SingularResolvent { z: Complex64 },

    #[error("eigen-solver failed to converge after {iterations} iterations")]
    EigenNoConvergence { iterations: usize },

    #[error("invariant `{what}` violated (residual {residual:.3e})")]
    InvariantViolation { what: &'static str, residual: f64 },

    #[error("parse error: {0}")]
    Parse(String),
}

impl PsfError {
    /// True for input/precondition problems, false for numerical failures.
    pub fn is_precondition(&self) -> bool {
        !matches!(
            self,
            PsfError::SingularResolvent { .. }
                | PsfError::EigenNoConvergence { .. }
                | PsfError::InvariantViolation { .. }
                | PsfError::NonFinite { .. }
        )
    }

    pub fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        PsfError::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
