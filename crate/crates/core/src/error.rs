use thiserror::Error;

use crate::expr::ExprError;

/// Errors raised while building grids and fields.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FieldError {
    #[error("empty grid")]
    EmptyGrid,
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("non-finite value {value} at grid point {index} ({point:?})")]
    NonFinite { index: usize, point: Vec<f64>, value: f64 },
    #[error("expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("fields are defined on different domains")]
    DomainMismatch,
    #[error("invalid tolerance: {0}")]
    InvalidTolerance(String),
    #[error(transparent)]
    Expr(#[from] ExprError),
}
