//! Multivariate real polynomials, phase-space symbol expressions, and
//! positivity tests for the classes of coercive polynomials of order `2k`.

mod expr;
mod poly;
mod positivity;
mod text;

pub use expr::{Node, SymbolExpr, DEFAULT_MAX_DERIVATIVE_ORDER};
pub use poly::{MultiIndex, Polynomial};
pub use positivity::{
    is_in_p2k, is_strictly_positive, sphere_points, P2kDecision, PositivityCertificate,
    DEFAULT_PROBE_BUDGET, DEFAULT_SPHERE_SAMPLES,
};
pub use text::{format_hex_float, VarLayout};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PolyError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("direction {direction} out of range for dimension {dim}")]
    DirectionOutOfRange { direction: usize, dim: usize },
    #[error("degree {degree} exceeds the allowed maximum {max}")]
    DegreeTooHigh { degree: u32, max: u32 },
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("power base is not certified strictly positive")]
    UncertifiedPower,
    #[error("derivative order {order} exceeds the configured maximum {max}")]
    DerivativeOrder { order: u32, max: u32 },
}
