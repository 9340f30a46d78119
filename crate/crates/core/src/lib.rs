//! Numerical spectral analysis of anharmonic oscillators `q(D) + p(x)`.

pub mod polycore;
pub mod hmetric;
pub mod liegrp;
pub mod oscspec;
pub mod quantize;
pub mod specfn;
