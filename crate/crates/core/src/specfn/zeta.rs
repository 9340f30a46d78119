use serde::{Deserialize, Serialize};

use super::growth::{growth_fit, model_tail, theoretical_rho, GrowthFit};
use super::SpecFnError;
use crate::oscspec::Spectrum;

/// Required gap between `s` and the estimated abscissa of convergence.
pub const ZETA_MARGIN: f64 = 0.1;
const REL_FLOOR: f64 = 1e-13;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZetaOptions {
    /// Number of eigenvalues summed directly; defaults to the converged count.
    pub j_cut: Option<usize>,
    /// Complete the sum with the fitted power-law tail.
    pub tail: bool,
}

impl Default for ZetaOptions {
    fn default() -> Self {
        ZetaOptions { j_cut: None, tail: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZetaResult {
    pub s: f64,
    pub partial_sum: f64,
    pub tail_estimate: f64,
    pub value: f64,
    pub error: f64,
    /// `1/ρ` from the growth fit (or from theory when no tail is used).
    pub abscissa_estimate: f64,
    pub abscissa_theory: f64,
    pub j_cut: usize,
    pub fit: Option<GrowthFit>,
}

pub fn zeta(spectrum: &Spectrum, s: f64) -> Result<ZetaResult, SpecFnError> {
    zeta_with(spectrum, s, ZetaOptions::default())
}

/// `Σ λ_j^{−s}` over the first `j_cut` converged eigenvalues, plus the model
/// tail beyond. The error bar combines the change from halving the direct
/// range, the fit residual, and a rounding floor.
pub fn zeta_with(spectrum: &Spectrum, s: f64, opts: ZetaOptions) -> Result<ZetaResult, SpecFnError> {
    let values = spectrum.converged();
    let j_cut = opts.j_cut.unwrap_or(values.len()).min(values.len());
    if j_cut == 0 {
        return Err(SpecFnError::InsufficientData { need: 1, got: 0 });
    }
    if values[..j_cut].iter().any(|&v| v <= 0.0) {
        return Err(SpecFnError::NonPositiveSpectrum);
    }
    let rho_theory = theoretical_rho(spectrum.dim, spectrum.k, spectrum.l);
    let partial = |m: usize| values[..m].iter().map(|v| v.powf(-s)).sum::<f64>();
    let partial_sum = partial(j_cut);
    if !opts.tail {
        return Ok(ZetaResult {
            s,
            partial_sum,
            tail_estimate: 0.0,
            value: partial_sum,
            error: REL_FLOOR * partial_sum.abs(),
            abscissa_estimate: 1.0 / rho_theory,
            abscissa_theory: 1.0 / rho_theory,
            j_cut,
            fit: None,
        });
    }
    let fit = growth_fit(values, j_cut, rho_theory)?;
    let abscissa = 1.0 / fit.rho;
    if s <= abscissa + ZETA_MARGIN {
        return Err(SpecFnError::BelowAbscissa { s, abscissa });
    }
    let tail = model_tail(&fit, s, j_cut);
    let value = partial_sum + tail;

    let half = j_cut / 2;
    let window_change = match growth_fit(values, half, rho_theory) {
        Ok(f) => (partial(half) + model_tail(&f, s, half) - value).abs(),
        Err(_) => tail.abs(),
    };
    let residual = tail.abs() * s * fit.rms_rel_residual;
    Ok(ZetaResult {
        s,
        partial_sum,
        tail_estimate: tail,
        value,
        error: window_change + residual + REL_FLOOR * value.abs(),
        abscissa_estimate: abscissa,
        abscissa_theory: 1.0 / rho_theory,
        j_cut,
        fit: Some(fit),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn odd(m: usize) -> Spectrum {
        Spectrum::from_values((0..m).map(|j| 2.0 * j as f64 + 1.0).collect(), 1, 1, 1)
    }

    #[test]
    fn toy_without_tail() {
        let sp = Spectrum::from_values(vec![2.0], 1, 1, 1);
        let z = zeta_with(&sp, 1.0, ZetaOptions { j_cut: None, tail: false }).unwrap();
        assert_eq!(z.value, 0.5);
    }

    #[test]
    fn below_abscissa_rejected() {
        assert!(matches!(zeta(&odd(100), 1.05), Err(SpecFnError::BelowAbscissa { .. })));
    }

    #[test]
    fn odd_squares() {
        let z = zeta(&odd(200), 2.0).unwrap();
        let exact = std::f64::consts::PI.powi(2) / 8.0;
        assert!((z.value - exact).abs() < 1e-9, "{}", z.value - exact);
        assert!(z.error >= (z.value - exact).abs());
        assert!(z.tail_estimate > 0.0);
    }
}
