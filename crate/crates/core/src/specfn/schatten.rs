use serde::{Deserialize, Serialize};

use super::growth::{growth_fit, model_tail, theoretical_rho, GrowthFit};
use super::SpecFnError;
use crate::hmetric::least_squares;
use crate::oscspec::Spectrum;

/// Half-width of the band around a threshold where verdicts need extra care.
pub const MARGIN: f64 = 0.05;
pub const MIN_DECAY_VALUES: usize = 30;
/// Singular values below this fraction of the largest are dropped as noise.
const SV_NOISE: f64 = 1e-13;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Convergent,
    Divergent,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchattenReport {
    pub k: u32,
    pub l: u32,
    pub n: usize,
    pub r: f64,
    pub mu: f64,
    /// `(k+ℓ)n / (2kℓr)`.
    pub threshold: f64,
    /// `1/(ρ r)` with `ρ` from the growth fit of the shifted spectrum.
    pub threshold_empirical: f64,
    pub verdict: Verdict,
    pub near_margin: bool,
    /// `Σ (λ_j + shift)^{−μr}` over the converged range.
    pub partial_sum: f64,
    /// Model tail, absent when the series diverges.
    pub tail: Option<f64>,
    pub fit: GrowthFit,
}

/// Decides whether `(shift + T)^{−μ}` lies in `S_r` from the growth of the
/// shifted eigenvalues.
///
/// Outside `±MARGIN` of the empirical threshold the sign decides. Inside,
/// the sign still decides (flagged `near_margin`) when the distance exceeds
/// three times the threshold uncertainty implied by the fit, otherwise the
/// verdict is inconclusive.
pub fn schatten_verdict(spectrum: &Spectrum, mu: f64, r: f64) -> Result<SchattenReport, SpecFnError> {
    if !(r > 0.0 && mu > 0.0) {
        return Err(SpecFnError::InvalidArgument("need μ > 0 and r > 0".into()));
    }
    let shifted: Vec<f64> = spectrum.converged().iter().map(|v| v + spectrum.shift).collect();
    let rho_theory = theoretical_rho(spectrum.dim, spectrum.k, spectrum.l);
    let fit = growth_fit(&shifted, shifted.len(), rho_theory)?;
    let threshold = 1.0 / (rho_theory * r);
    let threshold_empirical = 1.0 / (fit.rho * r);
    let gap = mu - threshold_empirical;
    let resolution = 3.0 * threshold_empirical * fit.rho_uncertainty / fit.rho;
    let near_margin = gap.abs() <= MARGIN;
    let verdict = if !near_margin || gap.abs() > resolution {
        if gap > 0.0 {
            Verdict::Convergent
        } else {
            Verdict::Divergent
        }
    } else {
        Verdict::Inconclusive
    };
    let e = mu * r;
    let partial_sum = shifted.iter().map(|v| v.powf(-e)).sum();
    let tail = (e * fit.rho > 1.0).then(|| model_tail(&fit, e, shifted.len()));
    Ok(SchattenReport {
        k: spectrum.k,
        l: spectrum.l,
        n: spectrum.dim,
        r,
        mu,
        threshold,
        threshold_empirical,
        verdict,
        near_margin,
        partial_sum,
        tail,
        fit,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SvDecay {
    /// Fitted `e` in `s_j ~ j^{−e}`.
    pub exponent: f64,
    pub r: f64,
    /// `s_j j^{1/r}` non-increasing with a definite drop over the last third.
    pub decreasing_tail: bool,
    pub passes_small_o: bool,
    /// Values kept after dropping the noise floor.
    pub used: usize,
}

/// Tests `s_j = o(j^{−1/r})` on a finite descending sequence, indexing from
/// `j = 1`.
pub fn sv_decay_fit(values: &[f64], r: f64) -> Result<SvDecay, SpecFnError> {
    let top = values.first().copied().unwrap_or(0.0);
    let used = values
        .iter()
        .take_while(|&&v| v > SV_NOISE * top && v > 0.0)
        .count();
    if used < MIN_DECAY_VALUES {
        return Err(SpecFnError::InsufficientData {
            need: MIN_DECAY_VALUES,
            got: used,
        });
    }
    let pts: Vec<(f64, f64)> = (used / 2..used)
        .map(|j| (((j + 1) as f64).ln(), values[j].ln()))
        .collect();
    let exponent = -least_squares(&pts).0;
    let weighted: Vec<f64> = (used - used / 3..used)
        .map(|j| values[j] * ((j + 1) as f64).powf(1.0 / r))
        .collect();
    let monotone = weighted.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12));
    let dropped = weighted.last().unwrap() <= &(weighted[0] * (1.0 - 1e-3));
    let decreasing_tail = monotone && dropped;
    Ok(SvDecay {
        exponent,
        r,
        decreasing_tail,
        passes_small_o: exponent > 1.0 / r + MARGIN || decreasing_tail,
        used,
    })
}

/// `(j, s_j)` rows for plotting.
pub fn sv_csv(values: &[f64]) -> String {
    let mut out = String::from("j,s\n");
    for (j, s) in values.iter().enumerate() {
        out.push_str(&format!("{j},{s:?}\n"));
    }
    out
}
