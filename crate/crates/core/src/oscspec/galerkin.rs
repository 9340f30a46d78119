use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::eigh::{eigh_dense, EigenError};
use super::ladder::{momentum_factor_powers, position_powers};
use crate::hmetric::{OscillatorSpec, SpecSummary};
use crate::polycore::Polynomial;

/// Largest total basis size `N^n` accepted by [`assemble`].
pub const MAX_BASIS: usize = 20_000;
pub const MAX_DIM: usize = 3;
/// Relative change allowed between `N` and `N + ΔN` for a converged eigenvalue.
pub const DEFAULT_TOL_REL: f64 = 1e-9;
pub const DEFAULT_DELTA_N: usize = 32;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OscError {
    #[error("basis size {size} exceeds the guard {MAX_BASIS}")]
    SizeGuard { size: usize },
    #[error("dimension {0} is above the supported maximum {MAX_DIM}")]
    Dimension(usize),
    #[error("basis size per axis must be at least 1")]
    EmptyBasis,
    #[error(transparent)]
    Eigen(#[from] EigenError),
    #[error("finite-difference oracle needs n = 1 and a monomial q(ξ) = c·ξ^(2l); {0}")]
    OracleNotApplicable(String),
    #[error("vector has relative mass {mass:e} outside the converged subspace")]
    Unconverged { mass: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// Matrix of `q(D) + p(x)` on the leading `N^n` Hermite block.
///
/// The operator is Hermitian; `imag` holds the antisymmetric imaginary part
/// produced by odd powers of `D` and is `None` when it vanishes.
#[derive(Clone, Debug)]
pub struct GalerkinMatrix {
    pub n: usize,
    pub per_axis: usize,
    pub buffer: usize,
    pub real: DMatrix<f64>,
    pub imag: Option<DMatrix<f64>>,
}

impl GalerkinMatrix {
    pub fn size(&self) -> usize {
        self.real.nrows()
    }

    /// Real symmetric matrix with the same spectrum; a complex Hermitian
    /// `R + iI` becomes `[[R, −I], [I, R]]`, which doubles every eigenvalue.
    pub fn real_form(&self) -> (DMatrix<f64>, bool) {
        match &self.imag {
            None => (self.real.clone(), false),
            Some(im) => {
                let s = self.size();
                let mut m = DMatrix::zeros(2 * s, 2 * s);
                m.view_mut((0, 0), (s, s)).copy_from(&self.real);
                m.view_mut((s, s), (s, s)).copy_from(&self.real);
                m.view_mut((0, s), (s, s)).copy_from(&(-im));
                m.view_mut((s, 0), (s, s)).copy_from(im);
                (m, true)
            }
        }
    }
}

fn nonzeros(m: &DMatrix<f64>, per_axis: usize) -> Vec<(usize, usize, f64)> {
    let mut out = Vec::new();
    for j in 0..per_axis {
        for i in 0..per_axis {
            let v = m[(i, j)];
            if v != 0.0 {
                out.push((i, j, v));
            }
        }
    }
    out
}

/// Adds `c · F_0 ⊗ … ⊗ F_{n-1}` (axis 0 most significant) to `target`.
fn add_kron(target: &mut DMatrix<f64>, factors: &[Vec<(usize, usize, f64)>], per_axis: usize, c: f64) {
    let mut acc: Vec<(usize, usize, f64)> = vec![(0, 0, c)];
    for f in factors {
        let mut next = Vec::with_capacity(acc.len() * f.len());
        for &(i, j, v) in &acc {
            for &(a, b, w) in f {
                next.push((i * per_axis + a, j * per_axis + b, v * w));
            }
        }
        acc = next;
    }
    for (i, j, v) in acc {
        target[(i, j)] += v;
    }
}

fn max_axis_degree(p: &Polynomial) -> u32 {
    (0..p.dim()).map(|i| p.degree_in(i)).max().unwrap_or(0)
}

/// Assembles `p(X) + q(D)` at per-axis size `N + buffer` and keeps the
/// leading `N` block on each axis, which makes the retained entries exact.
pub fn assemble(spec: &OscillatorSpec, per_axis: usize) -> Result<GalerkinMatrix, OscError> {
    let n = spec.n();
    if n > MAX_DIM {
        return Err(OscError::Dimension(n));
    }
    if per_axis == 0 {
        return Err(OscError::EmptyBasis);
    }
    let total = per_axis
        .checked_pow(n as u32)
        .filter(|&s| s <= MAX_BASIS)
        .ok_or(OscError::SizeGuard {
            size: per_axis.saturating_pow(n as u32),
        })?;
    let (p, q) = (spec.p(), spec.q());
    let buffer = p.degree().max(q.degree()) as usize;
    let size = per_axis + buffer;
    let xp: Vec<_> = position_powers(size, max_axis_degree(p))
        .iter()
        .map(|m| nonzeros(m, per_axis))
        .collect();
    let ap: Vec<_> = momentum_factor_powers(size, max_axis_degree(q))
        .iter()
        .map(|m| nonzeros(m, per_axis))
        .collect();

    let mut real = DMatrix::zeros(total, total);
    let mut imag = DMatrix::zeros(total, total);
    let mut has_imag = false;
    for (alpha, c) in p.terms() {
        let factors: Vec<_> = alpha.iter().map(|&e| xp[e as usize].clone()).collect();
        add_kron(&mut real, &factors, per_axis, c);
    }
    for (beta, c) in q.terms() {
        // D^β = i^{|β|} A^β
        let order: u32 = beta.iter().sum();
        let sign = if (order / 2) % 2 == 0 { 1.0 } else { -1.0 };
        let factors: Vec<_> = beta.iter().map(|&e| ap[e as usize].clone()).collect();
        if order % 2 == 0 {
            add_kron(&mut real, &factors, per_axis, sign * c);
        } else {
            add_kron(&mut imag, &factors, per_axis, sign * c);
            has_imag = true;
        }
    }
    Ok(GalerkinMatrix {
        n,
        per_axis,
        buffer,
        real,
        imag: has_imag.then_some(imag),
    })
}

/// Eigenvalues of an assembled matrix, ascending.
pub fn galerkin_eigenvalues(g: &GalerkinMatrix) -> Result<Vec<f64>, OscError> {
    let (m, doubled) = g.real_form();
    let vals = eigh_dense(&m, false)?.values;
    Ok(if doubled {
        vals.chunks(2).map(|c| 0.5 * (c[0] + c[1])).collect()
    } else {
        vals
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Hermite,
    Fd,
}

/// Ascending eigenvalues of `q(D) + p(x)` with convergence diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    /// Per-axis basis size for Hermite runs, grid points for FD runs.
    pub basis_size: usize,
    pub method: Method,
    /// Leading eigenvalues that are stable under refinement.
    pub converged_count: usize,
    pub tol_rel: f64,
    pub delta_n: usize,
    pub spec: SpecSummary,
    /// `p0 + q0`, so that `λ_j + shift` is the spectrum of the shifted operator.
    pub shift: f64,
    pub dim: usize,
    pub k: u32,
    pub l: u32,
}

impl Spectrum {
    pub fn converged(&self) -> &[f64] {
        &self.eigenvalues[..self.converged_count]
    }

    /// Synthetic spectrum for tests and toy inputs, all entries converged.
    pub fn from_values(values: Vec<f64>, dim: usize, k: u32, l: u32) -> Self {
        let mut values = values;
        values.sort_by(f64::total_cmp);
        Spectrum {
            converged_count: values.len(),
            basis_size: values.len(),
            eigenvalues: values,
            method: Method::Hermite,
            tol_rel: 0.0,
            delta_n: 0,
            spec: SpecSummary {
                n: dim,
                k,
                l,
                p: String::new(),
                q: String::new(),
                p0: 0.0,
                q0: 0.0,
                hash: String::new(),
            },
            shift: 0.0,
            dim,
            k,
            l,
        }
    }

    /// CSV with a `#`-prefixed header block and columns `j,lambda,converged`.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# spec_hash: {}\n", self.spec.hash));
        out.push_str(&format!("# p: {}\n# q: {}\n", self.spec.p, self.spec.q));
        out.push_str(&format!("# p0: {:?}\n# q0: {:?}\n", self.spec.p0, self.spec.q0));
        out.push_str(&format!(
            "# n: {}\n# k: {}\n# l: {}\n",
            self.dim, self.k, self.l
        ));
        out.push_str(&format!("# N: {}\n# dN: {}\n", self.basis_size, self.delta_n));
        let method = match self.method {
            Method::Hermite => "hermite",
            Method::Fd => "fd",
        };
        out.push_str(&format!("# method: {method}\n# tol_rel: {:e}\n", self.tol_rel));
        out.push_str(&format!("# converged_count: {}\n", self.converged_count));
        out.push_str("j,lambda,converged\n");
        for (j, l) in self.eigenvalues.iter().enumerate() {
            let c = u8::from(j < self.converged_count);
            out.push_str(&format!("{j},{l:?},{c}\n"));
        }
        out
    }
}

/// Number of leading entries of `coarse` that match `fine` within `tol_rel`.
pub fn leading_agreement(coarse: &[f64], fine: &[f64], tol_rel: f64) -> usize {
    coarse
        .iter()
        .zip(fine)
        .take_while(|(a, b)| (*a - *b).abs() <= tol_rel * a.abs().max(1.0))
        .count()
}

/// Hermite–Galerkin spectrum at per-axis size `N`, checked against `N + ΔN`.
pub fn spectrum(spec: &OscillatorSpec, per_axis: usize, delta_n: usize) -> Result<Spectrum, OscError> {
    spectrum_with_tol(spec, per_axis, delta_n, DEFAULT_TOL_REL)
}

pub fn spectrum_with_tol(
    spec: &OscillatorSpec,
    per_axis: usize,
    delta_n: usize,
    tol_rel: f64,
) -> Result<Spectrum, OscError> {
    let coarse = galerkin_eigenvalues(&assemble(spec, per_axis)?)?;
    let converged_count = if delta_n == 0 {
        0
    } else {
        let fine = galerkin_eigenvalues(&assemble(spec, per_axis + delta_n)?)?;
        leading_agreement(&coarse, &fine, tol_rel)
    };
    Ok(Spectrum {
        eigenvalues: coarse,
        basis_size: per_axis,
        method: Method::Hermite,
        converged_count,
        tol_rel,
        delta_n,
        spec: spec.summary(),
        shift: spec.shift(),
        dim: spec.n(),
        k: spec.k(),
        l: spec.l(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_is_diagonal() {
        let g = assemble(&OscillatorSpec::harmonic(1).unwrap(), 16).unwrap();
        for j in 0..16 {
            assert!((g.real[(j, j)] - (2.0 * j as f64 + 1.0)).abs() < 1e-13);
        }
        let off = g.real.clone() - DMatrix::from_diagonal(&g.real.diagonal());
        assert!(off.amax() < 1e-13);
        assert!(g.imag.is_none());
    }

    #[test]
    fn quartic_corner_entry() {
        let s = OscillatorSpec::prototype(1, 2, 1).unwrap();
        let g = assemble(&s, 10).unwrap();
        assert!((g.real[(0, 0)] - 1.25).abs() < 1e-15);
    }

    #[test]
    fn zero_polynomials_give_zero_matrix() {
        let s = OscillatorSpec::new_unchecked(
            1,
            1,
            1,
            Polynomial::zero(1),
            Polynomial::zero(1),
            0.5,
            0.5,
        )
        .unwrap();
        assert_eq!(assemble(&s, 8).unwrap().real.amax(), 0.0);
    }

    #[test]
    fn retained_block_is_exact() {
        let s = OscillatorSpec::prototype(1, 3, 2).unwrap();
        let small = assemble(&s, 12).unwrap().real;
        let big = assemble(&s, 40).unwrap().real;
        assert!((&small - big.view((0, 0), (12, 12))).amax() < 1e-9);
    }

    #[test]
    fn harmonic_2d_multiplicities() {
        let s = spectrum(&OscillatorSpec::harmonic(2).unwrap(), 12, 4).unwrap();
        let want = [2.0, 4.0, 4.0, 6.0, 6.0, 6.0, 8.0, 8.0, 8.0, 8.0];
        for (a, b) in s.eigenvalues.iter().zip(want) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(s.converged_count >= 12 * 13 / 2);
    }

    #[test]
    fn odd_momentum_terms_use_hermitian_embedding() {
        // ξ² + ξ + x² = (ξ + 1/2)² + x² − 1/4: harmonic levels shifted by −1/4
        let s = OscillatorSpec::parse(1, "x1^2", "xi1^2 + xi1", 0.5, 0.75).unwrap();
        let g = assemble(&s, 60).unwrap();
        assert!(g.imag.is_some());
        let vals = galerkin_eigenvalues(&g).unwrap();
        for j in 0..10 {
            assert!((vals[j] - (2.0 * j as f64 + 0.75)).abs() < 1e-9, "{}", vals[j]);
        }
    }

    #[test]
    fn guard() {
        let s = OscillatorSpec::harmonic(3).unwrap();
        assert!(matches!(assemble(&s, 30), Err(OscError::SizeGuard { .. })));
    }
}
