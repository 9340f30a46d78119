//! Power-law model `λ_j ≈ c (j + j0)^ρ` for the tail of a spectrum.

use serde::{Deserialize, Serialize};

use super::SpecFnError;

/// Relative distance within which the theoretical exponent replaces the fit.
pub const RHO_SNAP: f64 = 0.05;

/// `2kℓ / (n(k+ℓ))`.
pub fn theoretical_rho(n: usize, k: u32, l: u32) -> f64 {
    2.0 * (k * l) as f64 / (n as f64 * (k + l) as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthFit {
    pub c: f64,
    pub j0: f64,
    /// Exponent used by the model.
    pub rho: f64,
    pub rho_empirical: f64,
    pub rho_theory: f64,
    /// Whether `rho` was snapped to the theoretical value.
    pub rho_snapped: bool,
    /// Difference between fits over the last half and the last quarter.
    pub rho_uncertainty: f64,
    pub rms_rel_residual: f64,
    pub max_rel_residual: f64,
    /// Index window `[start, end)` used by the fit.
    pub window: (usize, usize),
}

impl GrowthFit {
    pub fn predict(&self, j: f64) -> f64 {
        self.c * (j + self.j0).powf(self.rho)
    }

    /// `true` when the fitted exponent differs from theory by more than
    /// [`RHO_SNAP`].
    pub fn discrepancy(&self) -> bool {
        !self.rho_snapped
    }
}

struct LineFit {
    slope: f64,
    intercept: f64,
    rms: f64,
    max: f64,
}

/// For fixed `ρ`, `λ^{1/ρ}` is linear in `j`; returns that line and the
/// relative residuals of the implied `λ`.
fn fit_fixed_rho(pts: &[(f64, f64)], rho: f64) -> LineFit {
    let lin: Vec<(f64, f64)> = pts.iter().map(|&(j, l)| (j, l.powf(1.0 / rho))).collect();
    let (slope, intercept) = crate::hmetric::least_squares(&lin);
    let mut sum = 0.0;
    let mut max = 0.0f64;
    for &(j, l) in pts {
        let base = slope * j + intercept;
        let r = if base > 0.0 {
            (base.powf(rho) / l - 1.0).abs()
        } else {
            f64::INFINITY
        };
        sum += r * r;
        max = max.max(r);
    }
    LineFit {
        slope,
        intercept,
        rms: (sum / pts.len() as f64).sqrt(),
        max,
    }
}

/// Golden-section search for the exponent minimising the residual, over
/// `log ρ ∈ [log 0.05, log 20]`.
fn best_rho(pts: &[(f64, f64)]) -> f64 {
    let cost = |lr: f64| fit_fixed_rho(pts, lr.exp()).rms;
    let (mut a, mut b) = (0.05f64.ln(), 20f64.ln());
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (cost(c), cost(d));
    for _ in 0..200 {
        if (b - a).abs() < 1e-12 {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = cost(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = cost(d);
        }
    }
    (0.5 * (a + b)).exp()
}

fn window_points(values: &[f64], start: usize, end: usize) -> Vec<(f64, f64)> {
    (start..end).map(|j| (j as f64, values[j])).collect()
}

/// Fits the last half of `values[..count]`, snapping to `rho_theory` when the
/// empirical exponent is within [`RHO_SNAP`] of it.
pub fn growth_fit(values: &[f64], count: usize, rho_theory: f64) -> Result<GrowthFit, SpecFnError> {
    let count = count.min(values.len());
    if count < 8 {
        return Err(SpecFnError::InsufficientData { need: 8, got: count });
    }
    if values[..count].iter().any(|&v| v <= 0.0) {
        return Err(SpecFnError::NonPositiveSpectrum);
    }
    let start = count / 2;
    let pts = window_points(values, start, count);
    let rho_emp = best_rho(&pts);
    let quarter = window_points(values, count - count / 4, count);
    let rho_quarter = if quarter.len() >= 4 { best_rho(&quarter) } else { rho_emp };
    let snapped = (rho_emp - rho_theory).abs() <= RHO_SNAP * rho_theory;
    let rho = if snapped { rho_theory } else { rho_emp };
    let line = fit_fixed_rho(&pts, rho);
    Ok(GrowthFit {
        c: line.slope.powf(rho),
        j0: line.intercept / line.slope,
        rho,
        rho_empirical: rho_emp,
        rho_theory,
        rho_snapped: snapped,
        rho_uncertainty: (rho_emp - rho_quarter).abs(),
        rms_rel_residual: line.rms,
        max_rel_residual: line.max,
        window: (start, count),
    })
}

/// `Σ_{j ≥ start} (c (j + j0)^ρ)^{−s}` by Euler–Maclaurin through the third
/// derivative.
pub fn model_tail(fit: &GrowthFit, s: f64, start: usize) -> f64 {
    let e = fit.rho * s;
    let x = start as f64 + fit.j0;
    let amp = fit.c.powf(-s);
    let f = amp * x.powf(-e);
    let integral = amp * x.powf(1.0 - e) / (e - 1.0);
    let d1 = -e * f / x;
    let d3 = -e * (e + 1.0) * (e + 2.0) * f / x.powi(3);
    integral + 0.5 * f - d1 / 12.0 + d3 / 720.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law() {
        let vals: Vec<f64> = (0..200).map(|j| 3.0 * (j as f64 + 0.25).powf(1.5)).collect();
        let f = growth_fit(&vals, 200, 1.0).unwrap();
        assert!(!f.rho_snapped);
        assert!((f.rho - 1.5).abs() < 1e-6, "{}", f.rho);
        assert!((f.c - 3.0).abs() < 1e-4 && (f.j0 - 0.25).abs() < 1e-3);
    }

    #[test]
    fn snapping() {
        let vals: Vec<f64> = (0..100).map(|j| 2.0 * j as f64 + 1.0).collect();
        let f = growth_fit(&vals, 100, 1.02).unwrap();
        assert!(f.rho_snapped);
        assert_eq!(f.rho, 1.02);
    }

    #[test]
    fn tail_of_odd_squares() {
        let vals: Vec<f64> = (0..100).map(|j| 2.0 * j as f64 + 1.0).collect();
        let f = growth_fit(&vals, 100, 1.0).unwrap();
        // Σ_{j≥100} (2j+1)^{-2}, reference by direct summation
        let direct: f64 = (100..2_000_000u64).rev().map(|j| (2.0 * j as f64 + 1.0).powi(-2)).sum::<f64>()
            + 1.0 / (4.0 * 2_000_000.0);
        assert!((model_tail(&f, 2.0, 100) - direct).abs() < 1e-12);
    }
}
