//! Sampled falsification tests of the metric and weight axioms.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::spec::{norm2, MetricAt, SplitMetric};
use crate::polycore::SymbolExpr;

const BATCH: usize = 512;
const MAX_VIOLATIONS: usize = 20;
const FALSIFICATION_NOTE: &str =
    "sampled falsification test: a pass means no counterexample was found, not a proof";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Axiom {
    Slowness,
    Uncertainty,
    Temperateness,
    WeightContinuity,
    WeightTemperateness,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxiomReport {
    pub axiom: Axiom,
    pub pass: bool,
    /// Smallest passing constant on the search lattice (an upper bound).
    #[serde(rename = "C")]
    pub c: Option<f64>,
    /// Smallest passing exponent on the lattice, for temperateness.
    #[serde(rename = "N")]
    pub n: Option<u32>,
    pub samples: usize,
    pub seed: u64,
    /// Largest pair ratio seen.
    pub max_ratio: f64,
    pub violations: Vec<Violation>,
    pub note: String,
}

/// Sampling controls shared by all checks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleConfig {
    pub pairs: usize,
    pub seed: u64,
    /// Radii of base points are log-uniform in `[r_min, r_max]`.
    pub r_min: f64,
    pub r_max: f64,
}

impl Default for SampleConfig {
    fn default() -> Self {
        SampleConfig {
            pairs: 10_000,
            seed: 0x616e_6873,
            r_min: 1e-3,
            r_max: 1e3,
        }
    }
}

pub fn default_c_lattice() -> Vec<f64> {
    (0..=6).map(|e| 10f64.powi(e)).collect()
}

pub fn default_n_lattice() -> Vec<u32> {
    (1..=8).collect()
}

pub fn default_weight_n_lattice() -> Vec<u32> {
    (0..=32).collect()
}

fn batch_rng(seed: u64, batch: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ (batch as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

fn random_direction(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
        let nrm = norm2(&v).sqrt();
        if nrm > 1e-12 {
            return v.into_iter().map(|c| c / nrm).collect();
        }
    }
}

fn random_point(rng: &mut ChaCha8Rng, dim: usize, cfg: &SampleConfig) -> Vec<f64> {
    let (lo, hi) = (cfg.r_min.ln(), cfg.r_max.ln());
    let r = (lo + (hi - lo) * rng.random::<f64>()).exp();
    random_direction(rng, dim).into_iter().map(|c| c * r).collect()
}

/// Offset `Y` with `g_X(Y) = 10^{-e}`, `e` uniform in `[0, 7]`.
fn near_offset(rng: &mut ChaCha8Rng, m: &MetricAt, n: usize) -> Vec<f64> {
    let target = 10f64.powf(-7.0 * rng.random::<f64>());
    let dir = random_direction(rng, 2 * n);
    let g = m.g(&dir[..n], &dir[n..]);
    let s = (target / g).sqrt();
    dir.into_iter().map(|c| c * s).collect()
}

/// Deterministic pair generation: batch `b` draws from its own seeded stream,
/// and batches are concatenated in order. The first pair is `(0, 0)`.
fn sample_pairs<M: SplitMetric + ?Sized>(
    metric: &M,
    cfg: &SampleConfig,
    near_fraction: f64,
    offsets: bool,
) -> Vec<(Vec<f64>, Vec<f64>)> {
    let n = metric.n();
    let batches = cfg.pairs.div_ceil(BATCH);
    let mut pairs: Vec<_> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = batch_rng(cfg.seed, b);
            let len = BATCH.min(cfg.pairs - b * BATCH);
            (0..len)
                .map(|_| {
                    let x = random_point(&mut rng, 2 * n, cfg);
                    let y = if rng.random::<f64>() < near_fraction {
                        let off = near_offset(&mut rng, &metric.at(&x), n);
                        if offsets {
                            off
                        } else {
                            x.iter().zip(&off).map(|(a, b)| a + b).collect()
                        }
                    } else {
                        random_point(&mut rng, 2 * n, cfg)
                    };
                    (x, y)
                })
                .collect::<Vec<_>>()
        })
        .flatten()
        .collect();
    if let Some(first) = pairs.first_mut() {
        *first = (vec![0.0; 2 * n], vec![0.0; 2 * n]);
    }
    pairs
}

fn metric_ratio(p: &MetricAt, q: &MetricAt) -> f64 {
    [p.a / q.a, q.a / p.a, p.b / q.b, q.b / p.b]
        .into_iter()
        .fold(1.0, f64::max)
}

struct ContinuitySample {
    premise: f64,
    ratio: f64,
    x: Vec<f64>,
    y: Vec<f64>,
}

fn continuity_search(
    axiom: Axiom,
    samples: Vec<ContinuitySample>,
    lattice: &[f64],
    seed: u64,
) -> AxiomReport {
    let total = samples.len();
    let max_ratio = samples.iter().map(|s| s.ratio).fold(1.0, f64::max);
    let passing = lattice.iter().copied().find(|&c| {
        samples
            .iter()
            .filter(|s| s.premise <= 1.0 / c)
            .all(|s| s.ratio <= c)
    });
    let violations = match passing {
        Some(_) => Vec::new(),
        None => {
            let c = lattice.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            samples
                .into_iter()
                .filter(|s| s.premise <= 1.0 / c && s.ratio > c)
                .take(MAX_VIOLATIONS)
                .map(|s| Violation {
                    x: s.x,
                    y: s.y,
                    ratio: s.ratio,
                })
                .collect()
        }
    };
    AxiomReport {
        axiom,
        pass: violations.is_empty(),
        c: passing,
        n: None,
        samples: total,
        seed,
        max_ratio,
        violations,
        note: FALSIFICATION_NOTE.into(),
    }
}

struct TemperSample {
    ratio: f64,
    dist: f64,
    x: Vec<f64>,
    y: Vec<f64>,
}

fn temperateness_search(
    axiom: Axiom,
    samples: Vec<TemperSample>,
    c_lattice: &[f64],
    n_lattice: &[u32],
    seed: u64,
) -> AxiomReport {
    let total = samples.len();
    let max_ratio = samples.iter().map(|s| s.ratio).fold(1.0, f64::max);
    // ratio ≤ C (1 + g^σ)^N, compared in logs to avoid overflow
    let needed = |n: u32| {
        samples
            .iter()
            .map(|s| s.ratio.ln() - n as f64 * s.dist.ln_1p())
            .fold(0.0, f64::max)
    };
    let mut found = None;
    for &n in n_lattice {
        let need = needed(n);
        if let Some(c) = c_lattice
            .iter()
            .copied()
            .find(|c| need <= c.ln() + 1e-12)
        {
            found = Some((c, n));
            break;
        }
    }
    let violations = match found {
        Some(_) => Vec::new(),
        None => {
            let c = c_lattice.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let n = n_lattice.iter().copied().max().unwrap_or(0);
            samples
                .into_iter()
                .filter(|s| s.ratio.ln() - n as f64 * s.dist.ln_1p() > c.ln() + 1e-12)
                .take(MAX_VIOLATIONS)
                .map(|s| Violation {
                    x: s.x,
                    y: s.y,
                    ratio: s.ratio,
                })
                .collect()
        }
    };
    AxiomReport {
        axiom,
        pass: violations.is_empty(),
        c: found.map(|f| f.0),
        n: found.map(|f| f.1),
        samples: total,
        seed,
        max_ratio,
        violations,
        note: FALSIFICATION_NOTE.into(),
    }
}

fn g_sigma_dist(m: &MetricAt, x: &[f64], y: &[f64], n: usize) -> f64 {
    let d: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
    m.g_sigma(&d[..n], &d[n..])
}

/// `g_X(Y) ≤ 1/C ⇒ (g_{X+Y}/g_X)^{±1} ≤ C`, checked through the denominator
/// ratios, which is equivalent for split metrics.
pub fn check_slowness<M: SplitMetric + ?Sized>(
    metric: &M,
    cfg: &SampleConfig,
    c_lattice: &[f64],
) -> AxiomReport {
    let n = metric.n();
    let samples = sample_pairs(metric, cfg, 0.75, true)
        .into_par_iter()
        .map(|(x, y)| {
            let mx = metric.at(&x);
            let xy: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
            ContinuitySample {
                premise: mx.g(&y[..n], &y[n..]),
                ratio: metric_ratio(&mx, &metric.at(&xy)),
                x,
                y,
            }
        })
        .collect();
    continuity_search(Axiom::Slowness, samples, c_lattice, cfg.seed)
}

/// `λ_g(X) ≥ 1` at every sampled point, the origin included.
pub fn check_uncertainty<M: SplitMetric + ?Sized>(metric: &M, cfg: &SampleConfig) -> AxiomReport {
    let pts: Vec<Vec<f64>> = sample_pairs(metric, cfg, 0.0, false)
        .into_iter()
        .map(|(x, _)| x)
        .collect();
    let lams: Vec<f64> = pts.par_iter().map(|x| metric.lambda_g(x)).collect();
    let min = lams.iter().copied().fold(f64::INFINITY, f64::min);
    let violations: Vec<Violation> = pts
        .into_iter()
        .zip(&lams)
        .filter(|(_, &l)| l < 1.0)
        .take(MAX_VIOLATIONS)
        .map(|(x, &l)| Violation {
            y: x.clone(),
            x,
            ratio: l,
        })
        .collect();
    AxiomReport {
        axiom: Axiom::Uncertainty,
        pass: violations.is_empty(),
        c: None,
        n: None,
        samples: lams.len(),
        seed: cfg.seed,
        max_ratio: 1.0 / min,
        violations,
        note: FALSIFICATION_NOTE.into(),
    }
}

/// `(g_X/g_Y)^{±1} ≤ C (1 + g^σ_Y(X−Y))^N`, checked on the denominators.
pub fn check_temperateness<M: SplitMetric + ?Sized>(
    metric: &M,
    cfg: &SampleConfig,
    c_lattice: &[f64],
    n_lattice: &[u32],
) -> AxiomReport {
    let n = metric.n();
    let samples = sample_pairs(metric, cfg, 0.25, false)
        .into_par_iter()
        .map(|(x, y)| {
            let (mx, my) = (metric.at(&x), metric.at(&y));
            TemperSample {
                ratio: metric_ratio(&mx, &my),
                dist: g_sigma_dist(&my, &x, &y, n),
                x,
                y,
            }
        })
        .collect();
    temperateness_search(Axiom::Temperateness, samples, c_lattice, n_lattice, cfg.seed)
}

/// Continuity and temperateness of a positive weight `M` with respect to the
/// metric.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightReport {
    pub continuity: AxiomReport,
    pub temperateness: AxiomReport,
}

impl WeightReport {
    pub fn pass(&self) -> bool {
        self.continuity.pass && self.temperateness.pass
    }
}

pub fn check_weight<M: SplitMetric + ?Sized>(
    metric: &M,
    weight: &SymbolExpr,
    cfg: &SampleConfig,
    c_lattice: &[f64],
    n_lattice: &[u32],
) -> WeightReport {
    let n = metric.n();
    let eval = |p: &[f64]| weight.eval(p).unwrap_or(f64::NAN);
    let ratio = |u: f64, v: f64| {
        let r = (u / v).max(v / u);
        if r.is_finite() {
            r
        } else {
            f64::INFINITY
        }
    };
    let cont = sample_pairs(metric, cfg, 0.75, true)
        .into_par_iter()
        .map(|(x, y)| {
            let xy: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
            ContinuitySample {
                premise: metric.at(&x).g(&y[..n], &y[n..]),
                ratio: ratio(eval(&x), eval(&xy)),
                x,
                y,
            }
        })
        .collect();
    let temp_cfg = SampleConfig {
        seed: cfg.seed.wrapping_add(1),
        ..cfg.clone()
    };
    let temp = sample_pairs(metric, &temp_cfg, 0.25, false)
        .into_par_iter()
        .map(|(x, y)| TemperSample {
            ratio: ratio(eval(&x), eval(&y)),
            dist: g_sigma_dist(&metric.at(&y), &x, &y, n),
            x,
            y,
        })
        .collect();
    WeightReport {
        continuity: continuity_search(Axiom::WeightContinuity, cont, c_lattice, cfg.seed),
        temperateness: temperateness_search(
            Axiom::WeightTemperateness,
            temp,
            c_lattice,
            n_lattice,
            temp_cfg.seed,
        ),
    }
}

/// All three metric axioms with default lattices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub slowness: AxiomReport,
    pub uncertainty: AxiomReport,
    pub temperateness: AxiomReport,
}

impl MetricReport {
    pub fn pass(&self) -> bool {
        self.slowness.pass && self.uncertainty.pass && self.temperateness.pass
    }
}

pub fn verify_metric<M: SplitMetric + ?Sized>(metric: &M, cfg: &SampleConfig) -> MetricReport {
    let c = default_c_lattice();
    MetricReport {
        slowness: check_slowness(metric, cfg, &c),
        uncertainty: check_uncertainty(metric, cfg),
        temperateness: check_temperateness(metric, cfg, &c, &default_n_lattice()),
    }
}

/// Largest sampled `sup_T g1_X(T)/g2_X(T)` in each direction, with witnesses.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricComparison {
    pub max_first_over_second: f64,
    pub witness_first_over_second: Vec<f64>,
    pub max_second_over_first: f64,
    pub witness_second_over_first: Vec<f64>,
    pub samples: usize,
}

pub fn compare_metrics<A: SplitMetric + ?Sized, B: SplitMetric + ?Sized>(
    first: &A,
    second: &B,
    cfg: &SampleConfig,
) -> MetricComparison {
    let pts: Vec<Vec<f64>> = sample_pairs(first, cfg, 0.0, false)
        .into_iter()
        .map(|(x, _)| x)
        .collect();
    let ratios: Vec<(f64, f64)> = pts
        .par_iter()
        .map(|x| {
            let (m1, m2) = (first.at(x), second.at(x));
            // g1 ≤ C g2 on all T iff a2/a1 ≤ C and b2/b1 ≤ C
            ((m2.a / m1.a).max(m2.b / m1.b), (m1.a / m2.a).max(m1.b / m2.b))
        })
        .collect();
    let argmax = |f: fn(&(f64, f64)) -> f64| {
        ratios
            .iter()
            .enumerate()
            .max_by(|a, b| f(a.1).total_cmp(&f(b.1)))
            .map(|(i, r)| (f(r), pts[i].clone()))
            .unwrap_or((f64::NAN, Vec::new()))
    };
    let (m12, w12) = argmax(|r| r.0);
    let (m21, w21) = argmax(|r| r.1);
    MetricComparison {
        max_first_over_second: m12,
        witness_first_over_second: w12,
        max_second_over_first: m21,
        witness_second_over_first: w21,
        samples: pts.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hmetric::{DistortedMetric, OscillatorSpec};
    use crate::polycore::Polynomial;

    fn small() -> SampleConfig {
        SampleConfig {
            pairs: 2000,
            ..Default::default()
        }
    }

    #[test]
    fn harmonic_axioms_pass() {
        let s = OscillatorSpec::harmonic(1).unwrap();
        let r = verify_metric(&s, &small());
        assert!(r.pass(), "{r:?}");
        assert!(r.slowness.c.is_some() && r.temperateness.n.is_some());
    }

    #[test]
    fn zero_offset_ratio_is_one() {
        let s = OscillatorSpec::prototype(1, 2, 1).unwrap();
        let x = [3.0, -2.0];
        assert_eq!(metric_ratio(&s.metric_at(&x), &s.metric_at(&x)), 1.0);
    }

    #[test]
    fn uncertainty_fails_for_small_shift() {
        let s = OscillatorSpec::new_unchecked(
            1,
            1,
            1,
            Polynomial::norm_power(1, 1),
            Polynomial::norm_power(1, 1),
            0.1,
            0.1,
        )
        .unwrap();
        let r = check_uncertainty(&s, &small());
        assert!(!r.pass);
        assert_eq!(r.violations[0].x, vec![0.0, 0.0]);
    }

    #[test]
    fn distorted_metric_is_not_slow() {
        let spec = OscillatorSpec::prototype(1, 2, 1).unwrap();
        let bad = DistortedMetric {
            spec,
            x_exponent: 2.0,
        };
        let r = check_slowness(&bad, &small(), &default_c_lattice());
        assert!(!r.pass);
        assert!(!r.violations.is_empty());
    }

    #[test]
    fn constant_weight() {
        let s = OscillatorSpec::harmonic(1).unwrap();
        let one = SymbolExpr::constant(1, 1.0);
        let r = check_weight(
            &s,
            &one,
            &small(),
            &default_c_lattice(),
            &default_weight_n_lattice(),
        );
        assert!(r.pass());
        assert_eq!(r.continuity.c, Some(1.0));
        assert_eq!((r.temperateness.c, r.temperateness.n), (Some(1.0), Some(0)));
    }

    #[test]
    fn sampling_is_reproducible() {
        let s = OscillatorSpec::prototype(1, 2, 1).unwrap();
        let a = check_temperateness(&s, &small(), &default_c_lattice(), &default_n_lattice());
        let b = check_temperateness(&s, &small(), &default_c_lattice(), &default_n_lattice());
        assert_eq!(a, b);
    }
}
