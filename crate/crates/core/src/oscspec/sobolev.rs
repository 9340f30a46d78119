use nalgebra::{DMatrix, DVector};

use super::eigh::eigh_dense;
use super::galerkin::{assemble, galerkin_eigenvalues, leading_agreement, OscError, DEFAULT_TOL_REL};
use crate::hmetric::OscillatorSpec;

/// Relative mass allowed outside the converged eigenspace.
pub const MASS_TOL: f64 = 1e-8;

/// Eigenpairs of the prototype `A = (−Δ)^ℓ + |x|^{2k}`, for `H^m_{k,ℓ}` norms
/// of vectors given by Hermite coefficients.
#[derive(Clone, Debug)]
pub struct SobolevContext {
    pub per_axis: usize,
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
    pub converged: usize,
}

impl SobolevContext {
    pub fn new(n: usize, k: u32, l: u32, per_axis: usize, delta_n: usize) -> Result<Self, OscError> {
        let spec = OscillatorSpec::prototype(n, k, l)
            .map_err(|e| OscError::InvalidArgument(e.to_string()))?;
        let g = assemble(&spec, per_axis)?;
        let eig = eigh_dense(&g.real, true)?;
        let fine = galerkin_eigenvalues(&assemble(&spec, per_axis + delta_n)?)?;
        let converged = leading_agreement(&eig.values, &fine, DEFAULT_TOL_REL);
        Ok(SobolevContext {
            per_axis,
            values: eig.values,
            vectors: eig.vectors.expect("requested"),
            converged,
        })
    }

    /// `‖(A + 1)^{m/2} u‖`, computed from the converged eigenpairs.
    pub fn norm(&self, u: &[f64], m: f64) -> Result<f64, OscError> {
        if u.len() != self.vectors.nrows() {
            return Err(OscError::InvalidArgument(format!(
                "vector length {} does not match basis size {}",
                u.len(),
                self.vectors.nrows()
            )));
        }
        let u = DVector::from_column_slice(u);
        let basis = self.vectors.columns(0, self.converged);
        let coeffs = basis.transpose() * &u;
        let total = u.norm();
        let inside = coeffs.norm();
        let outside = (total * total - inside * inside).max(0.0).sqrt();
        if outside > MASS_TOL * total.max(f64::MIN_POSITIVE) {
            return Err(OscError::Unconverged {
                mass: outside / total,
            });
        }
        Ok(coeffs
            .iter()
            .zip(&self.values)
            .map(|(c, lam)| (lam + 1.0).powf(m) * c * c)
            .sum::<f64>()
            .sqrt())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(len: usize, i: usize) -> Vec<f64> {
        let mut v = vec![0.0; len];
        v[i] = 1.0;
        v
    }

    #[test]
    fn harmonic_eigenfunctions() {
        let ctx = SobolevContext::new(1, 1, 1, 64, 8).unwrap();
        assert!((ctx.norm(&unit(64, 0), 2.0).unwrap() - 2.0).abs() < 1e-12);
        assert!((ctx.norm(&unit(64, 1), -2.0).unwrap() - 0.25).abs() < 1e-12);
        let u: Vec<f64> = (0..64).map(|j| if j < 5 { 0.3 } else { 0.0 }).collect();
        let l2 = u.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!((ctx.norm(&u, 0.0).unwrap() - l2).abs() < 1e-12);
    }

    #[test]
    fn mass_outside_converged_block() {
        let ctx = SobolevContext::new(1, 2, 1, 40, 8).unwrap();
        assert!(matches!(ctx.norm(&unit(40, 39), 1.0), Err(OscError::Unconverged { .. })));
    }
}
