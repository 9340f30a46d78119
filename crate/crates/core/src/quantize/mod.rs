//! Dense grid discretizations of `t`-quantizations `a_t(x, D)` in one
//! dimension, with the `e^{2πi(x−y)ξ}` phase convention.

mod compose;
mod grid;
mod kernel;

use thiserror::Error;

use crate::polycore::PolyError;

pub use compose::{composition_check, kn_compose_exact, ComplexSymbol, ComposeTerm, CompositionCheck};
pub use grid::PhaseGrid;
pub use kernel::{
    converged_trace, grid_trace, op_trace, quantize, quantize_fn, resolved_singular_values,
    symbol_hash, QuantizedOperator, ResolvedSingularValues, TraceReport, DECAY_TOL, RESOLVED_TOL,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuantizeError {
    #[error("symbol does not decay in ξ within the grid (edge/peak ratio {ratio:e})")]
    NoDecay { ratio: f64 },
    #[error("only one-dimensional symbols are quantized, got n = {0}")]
    Dimension(usize),
    #[error("t = {0} is not one of 0, 1/2, 1")]
    UnsupportedT(f64),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("not a polynomial symbol: {0}")]
    NotPolynomial(String),
    #[error("i/o: {0}")]
    Io(String),
    #[error(transparent)]
    Poly(#[from] PolyError),
}
