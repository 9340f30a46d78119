//! Finite-difference reference spectra on a Dirichlet box, 1D only.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::eigh::{eigh_dense, eigh_tridiagonal};
use super::galerkin::{Method, OscError, Spectrum};
use crate::hmetric::OscillatorSpec;

/// Fraction of the box used by the box-sensitivity rerun.
const SHRUNK_BOX: f64 = 0.8;
const BOX_TOL_REL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FdDiagnostics {
    pub half_width: f64,
    pub points: usize,
    /// Eigenvalues at spacing `h` and `h/2` before extrapolation.
    pub coarse: Vec<f64>,
    pub fine: Vec<f64>,
    /// Change of each eigenvalue when the box shrinks to 80% at fixed spacing.
    pub box_sensitivity: Vec<f64>,
    /// Absolute eigenvalue accuracy of the fine-grid solve, `~ε‖M‖`.
    pub rounding_floor: f64,
}

/// Returns `(c, ℓ)` for `q(ξ) = c·ξ^{2ℓ}`.
fn monomial_q(spec: &OscillatorSpec) -> Result<(f64, u32), OscError> {
    if spec.n() != 1 {
        return Err(OscError::OracleNotApplicable(format!("n = {}", spec.n())));
    }
    let terms: Vec<_> = spec.q().terms().collect();
    match terms.as_slice() {
        [(alpha, c)] if alpha[0] % 2 == 0 && alpha[0] > 0 => Ok((*c, alpha[0] / 2)),
        _ => Err(OscError::OracleNotApplicable("q is not an even monomial".into())),
    }
}

/// Eigenvalues of `c(−δ²/h²)^ℓ + p(x_i)` on `points` interior nodes of
/// `[−L, L]`.
fn fd_eigenvalues(spec: &OscillatorSpec, half_width: f64, points: usize) -> Result<Vec<f64>, OscError> {
    let (c, l) = monomial_q(spec)?;
    let h = 2.0 * half_width / (points + 1) as f64;
    let xs: Vec<f64> = (0..points).map(|i| -half_width + h * (i + 1) as f64).collect();
    let pot: Vec<f64> = xs.iter().map(|&x| spec.p().eval_unchecked(&[x])).collect();
    if l == 1 {
        let s = c / (h * h);
        let diag: Vec<f64> = pot.iter().map(|v| v + 2.0 * s).collect();
        let off = vec![-s; points.saturating_sub(1)];
        return Ok(eigh_tridiagonal(&diag, &off)?);
    }
    // (−δ²)^ℓ with Dirichlet ends, via repeated products of the second difference
    let mut lap = DMatrix::zeros(points, points);
    for i in 0..points {
        lap[(i, i)] = 2.0;
        if i + 1 < points {
            lap[(i, i + 1)] = -1.0;
            lap[(i + 1, i)] = -1.0;
        }
    }
    let mut op = lap.clone();
    for _ in 1..l {
        op = &op * &lap;
    }
    let mut m = op * (c / h.powi(2 * l as i32));
    for i in 0..points {
        m[(i, i)] += pot[i];
    }
    Ok(eigh_dense(&m, false)?.values)
}

/// Finite-difference spectrum with Richardson extrapolation over spacings
/// `h` and `h/2` (`points` and `2·points + 1` interior nodes).
///
/// `converged_count` counts leading eigenvalues insensitive to shrinking
/// the box; see [`FdDiagnostics::box_sensitivity`].
pub fn fd_spectrum(
    spec: &OscillatorSpec,
    half_width: f64,
    points: usize,
) -> Result<(Spectrum, FdDiagnostics), OscError> {
    if points < 8 || half_width <= 0.0 {
        return Err(OscError::InvalidArgument("need points ≥ 8 and L > 0".into()));
    }
    let coarse = fd_eigenvalues(spec, half_width, points)?;
    let fine_points = 2 * points + 1;
    let fine = fd_eigenvalues(spec, half_width, fine_points)?;
    let extrapolated: Vec<f64> = coarse
        .iter()
        .zip(&fine)
        .map(|(c, f)| (4.0 * f - c) / 3.0)
        .collect();
    // same spacing as the fine grid on a smaller box
    let h = 2.0 * half_width / (fine_points + 1) as f64;
    let shrunk_points = ((2.0 * SHRUNK_BOX * half_width / h).round() as usize).saturating_sub(1);
    let shrunk = fd_eigenvalues(spec, (shrunk_points + 1) as f64 * h / 2.0, shrunk_points)?;
    let box_sensitivity: Vec<f64> = fine.iter().zip(&shrunk).map(|(a, b)| (a - b).abs()).collect();
    let rounding_floor = {
        let (c, l) = monomial_q(spec)?;
        let pmax = [half_width, -half_width]
            .iter()
            .map(|&x| spec.p().eval_unchecked(&[x]).abs())
            .fold(0.0, f64::max);
        64.0 * f64::EPSILON * (c.abs() * 4f64.powi(l as i32) / h.powi(2 * l as i32) + pmax)
    };
    let converged_count = fine
        .iter()
        .zip(&box_sensitivity)
        .take_while(|(l, s)| **s <= BOX_TOL_REL * l.abs().max(1.0) + rounding_floor)
        .count();
    let spectrum = Spectrum {
        eigenvalues: extrapolated,
        basis_size: points,
        method: Method::Fd,
        converged_count,
        tol_rel: BOX_TOL_REL,
        delta_n: fine_points - points,
        spec: spec.summary(),
        shift: spec.shift(),
        dim: 1,
        k: spec.k(),
        l: spec.l(),
    };
    Ok((
        spectrum,
        FdDiagnostics {
            half_width,
            points,
            coarse,
            fine,
            box_sensitivity,
            rounding_floor,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_ground_state() {
        let s = OscillatorSpec::harmonic(1).unwrap();
        let (sp, _) = fd_spectrum(&s, 12.0, 4000).unwrap();
        assert!((sp.eigenvalues[0] - 1.0).abs() < 1e-7, "{}", sp.eigenvalues[0]);
        assert!(sp.converged_count >= 10);
    }

    #[test]
    fn small_box_is_flagged() {
        let s = OscillatorSpec::prototype(1, 2, 1).unwrap();
        let (small, _) = fd_spectrum(&s, 2.0, 1000).unwrap();
        let (big, _) = fd_spectrum(&s, 8.0, 4000).unwrap();
        assert!(small.converged_count < 3);
        assert!((small.eigenvalues[10] - big.eigenvalues[10]).abs() > 1.0);
    }

    #[test]
    fn quartic_derivative_fd_matches_bilaplacian_galerkin() {
        let s = OscillatorSpec::prototype(1, 1, 2).unwrap();
        let (sp, _) = fd_spectrum(&s, 16.0, 1000).unwrap();
        let g = super::super::spectrum(&s, 200, 0).unwrap();
        assert!(sp.converged_count >= 4);
        for j in 0..4 {
            assert!((sp.eigenvalues[j] - g.eigenvalues[j]).abs() < 1e-5 * g.eigenvalues[j]);
        }
    }

    #[test]
    fn rejects_non_monomial() {
        let s = OscillatorSpec::parse(1, "x1^2", "xi1^2 + xi1^4", 0.5, 0.5).unwrap();
        assert!(matches!(fd_spectrum(&s, 8.0, 100), Err(OscError::OracleNotApplicable(_))));
    }
}
