use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::GroupParams;
use crate::hmetric::SpecSummary;
use crate::oscspec::spectrum;
use crate::specfn::{counting_fit, schatten_verdict, zeta, CountingFit, SchattenReport, ZetaResult};

/// Which pipeline stages to run at every parameter point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stages {
    pub per_axis: usize,
    pub delta_n: usize,
    pub zeta_s: Option<f64>,
    pub counting: bool,
    /// `(γ, r)` pairs for Schatten verdicts.
    pub schatten: Vec<(f64, f64)>,
}

impl Default for Stages {
    fn default() -> Self {
        Stages {
            per_axis: 400,
            delta_n: 64,
            zeta_s: None,
            counting: true,
            schatten: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub params: GroupParams,
    pub spec: Option<SpecSummary>,
    pub normalizer: Option<f64>,
    pub ground_state: Option<f64>,
    pub converged_count: Option<usize>,
    pub zeta: Option<ZetaResult>,
    pub counting: Option<CountingFit>,
    pub schatten: Vec<SchattenReport>,
    /// Failures of individual stages, in order of occurrence.
    pub errors: Vec<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepBundle {
    pub points: Vec<SweepPoint>,
}

impl SweepBundle {
    /// `(params, λ_0)` for the points that produced a spectrum.
    pub fn ground_states(&self) -> Vec<(GroupParams, f64)> {
        self.points
            .iter()
            .filter_map(|p| p.ground_state.map(|g| (p.params, g)))
            .collect()
    }

    /// CSV with one row per point: parameters, normalizer, `λ_0`, counting
    /// exponent.
    pub fn table_csv(&self) -> String {
        let mut out = String::from("params,normalizer,ground_state,counting_exponent,errors\n");
        let opt = |v: Option<f64>| v.map(|x| format!("{x:?}")).unwrap_or_default();
        for p in &self.points {
            out.push_str(&format!(
                "\"{}\",{},{},{},{}\n",
                serde_json::to_string(&p.params).unwrap_or_default().replace('"', "'"),
                opt(p.normalizer),
                opt(p.ground_state),
                opt(p.counting.as_ref().map(|c| c.exponent)),
                p.errors.len()
            ));
        }
        out
    }
}

fn run_point(params: GroupParams, stages: &Stages) -> SweepPoint {
    let mut point = SweepPoint {
        params,
        spec: None,
        normalizer: None,
        ground_state: None,
        converged_count: None,
        zeta: None,
        counting: None,
        schatten: Vec::new(),
        errors: Vec::new(),
    };
    let family = match params.realize() {
        Ok(f) => f,
        Err(e) => {
            point.errors.push(e.to_string());
            return point;
        }
    };
    point.spec = Some(family.spec.summary());
    point.normalizer = Some(family.normalizer);
    let sp = match spectrum(&family.spec, stages.per_axis, stages.delta_n) {
        Ok(s) => s,
        Err(e) => {
            point.errors.push(e.to_string());
            return point;
        }
    };
    point.ground_state = sp.eigenvalues.first().copied();
    point.converged_count = Some(sp.converged_count);
    if let Some(s) = stages.zeta_s {
        match zeta(&sp, s) {
            Ok(z) => point.zeta = Some(z),
            Err(e) => point.errors.push(format!("zeta: {e}")),
        }
    }
    if stages.counting {
        match counting_fit(&sp) {
            Ok(c) => point.counting = Some(c),
            Err(e) => point.errors.push(format!("counting: {e}")),
        }
    }
    for &(gamma, r) in &stages.schatten {
        match schatten_verdict(&sp, gamma, r) {
            Ok(rep) => point.schatten.push(rep),
            Err(e) => point.errors.push(format!("schatten γ={gamma} r={r}: {e}")),
        }
    }
    point
}

/// Runs the pipeline at every parameter point. Points are independent;
/// failures are recorded per point and never abort the sweep. Output order
/// follows `grid`.
pub fn sweep(grid: &[GroupParams], stages: &Stages) -> SweepBundle {
    SweepBundle {
        points: grid.par_iter().map(|&p| run_point(p, stages)).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_grid() {
        assert!(sweep(&[], &Stages::default()).points.is_empty());
    }

    #[test]
    fn failures_are_isolated() {
        let grid = [
            GroupParams::Engel { lambda: 0.0, mu: 1.0 },
            GroupParams::Heisenberg { nu: 2.0, k: 1, l: 1, n: 1 },
        ];
        let stages = Stages {
            per_axis: 64,
            delta_n: 8,
            counting: false,
            ..Stages::default()
        };
        let b = sweep(&grid, &stages);
        assert_eq!(b.points.len(), 2);
        assert!(!b.points[0].errors.is_empty());
        assert!((b.points[1].ground_state.unwrap() - 2.0).abs() < 1e-10);
        assert_eq!(b.ground_states().len(), 1);
    }
}
