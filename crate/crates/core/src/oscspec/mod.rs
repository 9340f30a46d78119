//! Spectra of `T = q(D) + p(x)` on `L²(R^n)` by Hermite–Galerkin truncation,
//! with a finite-difference reference solver and `H^m_{k,ℓ}` norms.

mod eigh;
mod fd;
mod galerkin;
mod ladder;
mod sobolev;

pub use eigh::{asymmetry, eigh_dense, eigh_tridiagonal, EigenError, Eigh, MAX_QL_SWEEPS};
pub use fd::{fd_spectrum, FdDiagnostics};
pub use galerkin::{
    assemble, galerkin_eigenvalues, leading_agreement, spectrum, spectrum_with_tol,
    GalerkinMatrix, Method, OscError, Spectrum, DEFAULT_DELTA_N, DEFAULT_TOL_REL, MAX_BASIS,
    MAX_DIM,
};
pub use ladder::{
    ladder_coefficient, momentum_factor, momentum_factor_powers, momentum_squared,
    position_matrix, position_powers,
};
pub use sobolev::{SobolevContext, MASS_TOL};
