//! Model operators from representations of the Engel, Cartan and Heisenberg
//! groups, and parameter sweeps through the spectral pipeline.

mod family;
mod sweep;

use thiserror::Error;

use crate::hmetric::SpecError;

pub use family::{
    cartan_spec, engel_spec, heisenberg_spec, Group, GroupParams, GroupSymbolFamily,
};
pub use sweep::{sweep, Stages, SweepBundle, SweepPoint};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GroupError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Spec(#[from] SpecError),
}
