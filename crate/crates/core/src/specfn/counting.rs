use serde::{Deserialize, Serialize};

use super::SpecFnError;
use crate::hmetric::least_squares;
use crate::oscspec::Spectrum;

pub const MIN_COUNTING_VALUES: usize = 30;
/// Eigenvalues closer than this (relative) form one step of the staircase.
const DEGENERACY_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountingFit {
    /// Distinct eigenvalues and `N(λ) = #{λ_j ≤ λ}` at each.
    pub lambda: Vec<f64>,
    pub count: Vec<usize>,
    pub exponent: f64,
    pub constant: f64,
    /// `n(1/2k + 1/2ℓ)`.
    pub theory_exponent: f64,
    /// Staircase steps `[start, end)` used by the fit.
    pub window: (usize, usize),
}

impl CountingFit {
    pub fn relative_deviation(&self) -> f64 {
        (self.exponent - self.theory_exponent).abs() / self.theory_exponent
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("lambda,N\n");
        for (l, c) in self.lambda.iter().zip(&self.count) {
            out.push_str(&format!("{l:?},{c}\n"));
        }
        out
    }
}

/// Groups equal eigenvalues into steps; returns `(λ, N(λ))` pairs.
pub fn staircase(values: &[f64]) -> Vec<(f64, usize)> {
    let mut steps: Vec<(f64, usize)> = Vec::new();
    for (j, &v) in values.iter().enumerate() {
        match steps.last_mut() {
            Some((l, c)) if (v - *l).abs() <= DEGENERACY_TOL * l.abs().max(1.0) => *c = j + 1,
            _ => steps.push((v, j + 1)),
        }
    }
    steps
}

/// Least-squares slope of `log N` against `log λ` over the upper half of the
/// converged staircase. The last step is dropped since its multiplicity may
/// be cut off.
pub fn counting_fit(spectrum: &Spectrum) -> Result<CountingFit, SpecFnError> {
    let values = spectrum.converged();
    if values.len() < MIN_COUNTING_VALUES {
        return Err(SpecFnError::InsufficientData {
            need: MIN_COUNTING_VALUES,
            got: values.len(),
        });
    }
    let mut steps = staircase(values);
    steps.pop();
    let half = values.len() / 2;
    let start = steps.iter().position(|&(_, c)| c > half).unwrap_or(0);
    let pts: Vec<(f64, f64)> = steps[start..]
        .iter()
        .filter(|(l, _)| *l > 0.0)
        .map(|&(l, c)| (l.ln(), (c as f64).ln()))
        .collect();
    if pts.len() < 3 {
        return Err(SpecFnError::InsufficientData { need: 3, got: pts.len() });
    }
    let (exponent, intercept) = least_squares(&pts);
    let (k, l) = (spectrum.k as f64, spectrum.l as f64);
    Ok(CountingFit {
        lambda: steps.iter().map(|s| s.0).collect(),
        count: steps.iter().map(|s| s.1).collect(),
        exponent,
        constant: intercept.exp(),
        theory_exponent: spectrum.dim as f64 * (0.5 / k + 0.5 / l),
        window: (start, steps.len()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn staircase_groups_degenerate_values() {
        let s = staircase(&[2.0, 4.0, 4.0, 6.0, 6.0, 6.0]);
        assert_eq!(s, vec![(2.0, 1), (4.0, 3), (6.0, 6)]);
    }

    #[test]
    fn pure_power_law() {
        let vals: Vec<f64> = (1..=400).map(|j| (j as f64).powf(4.0 / 3.0)).collect();
        let f = counting_fit(&Spectrum::from_values(vals, 1, 2, 1)).unwrap();
        assert!((f.exponent - 0.75).abs() < 1e-9);
        assert!(f.relative_deviation() < 1e-8);
    }

    #[test]
    fn too_short() {
        let sp = Spectrum::from_values(vec![1.0; 10], 1, 1, 1);
        assert!(counting_fit(&sp).is_err());
    }
}
