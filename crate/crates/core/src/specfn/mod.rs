//! Spectral zeta functions, Schatten-class verdicts, counting and decay fits,
//! and phase-space integrals.

mod counting;
mod growth;
mod integrals;
mod matrix;
pub mod quad;
mod schatten;
mod zeta;

use thiserror::Error;

use crate::polycore::PolyError;

pub use counting::{counting_fit, staircase, CountingFit, MIN_COUNTING_VALUES};
pub use growth::{growth_fit, model_tail, theoretical_rho, GrowthFit, RHO_SNAP};
pub use integrals::{
    phase_space_integral, weight_integrability, PhaseIntegral, Scheme, WeightIntegrability,
};
pub use matrix::{
    eigenvalues, holder_slack, nesting_slack, schatten_norm, singular_values, weyl_slack,
};
pub use schatten::{
    schatten_verdict, sv_csv, sv_decay_fit, SchattenReport, SvDecay, Verdict, MARGIN,
    MIN_DECAY_VALUES,
};
pub use zeta::{zeta, zeta_with, ZetaOptions, ZetaResult, ZETA_MARGIN};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecFnError {
    #[error("need at least {need} values, got {got}")]
    InsufficientData { need: usize, got: usize },
    #[error("spectrum is not strictly positive over the converged range")]
    NonPositiveSpectrum,
    #[error("s = {s} is not above the estimated abscissa {abscissa} plus margin")]
    BelowAbscissa { s: f64, abscissa: f64 },
    #[error("integrand fails the shell decay check (log2 slope {shell_slope})")]
    NotIntegrable { shell_slope: f64 },
    #[error("symbol is not a function of x^2k + xi^2l")]
    NotRadial,
    #[error("phase-space integrals are implemented for n = 1, got n = {0}")]
    Dimension(usize),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Poly(#[from] PolyError),
}
