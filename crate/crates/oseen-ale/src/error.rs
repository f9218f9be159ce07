//! Error types shared across the solver.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("cell {cell} has non-positive Jacobian determinant {det} at t = {time}")]
    InvertedCell { cell: usize, time: f64, det: f64 },

    #[error("index {index} out of range (len {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("turbulent viscosity must be nonnegative, got {0}")]
    NegativeViscosity(f64),

    #[error("linear solve failed: relative residual {residual:e} above tolerance {tolerance:e}")]
    SolverFailure { residual: f64, tolerance: f64 },

    #[error("trajectory was produced by the {found:?} scheme, expected {expected:?}")]
    WrongVariant {
        expected: crate::timestepper::SchemeVariant,
        found: crate::timestepper::SchemeVariant,
    },

    #[error("time-step admissibility condition violated: lhs {lhs} > 1/2")]
    ConditionViolated { lhs: f64 },

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("invalid motion program: {0}")]
    InvalidMotion(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, SolverError>;
