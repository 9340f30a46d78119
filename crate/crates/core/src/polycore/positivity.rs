//! Sampled coercivity tests: membership in P_{2k} and strict positivity.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use super::{PolyError, Polynomial};

/// Default number of unit-sphere probes.
pub const DEFAULT_SPHERE_SAMPLES: usize = 10_000;

/// Default grid budget for positivity certification.
pub const DEFAULT_PROBE_BUDGET: usize = 10_000;

/// Relative threshold below which a sphere minimum counts as zero.
const SPHERE_ZERO_TOL: f64 = 1e-12;

/// Quasi-uniform points on the unit sphere of `R^dim`.
///
/// Coordinate axes and the main diagonals are always included so that forms
/// vanishing on them are caught exactly.
pub fn sphere_points(dim: usize, count: usize) -> Vec<Vec<f64>> {
    let mut pts = Vec::with_capacity(count + 4 * dim + 2);
    match dim {
        0 => return pts,
        1 => {
            pts.push(vec![1.0]);
            pts.push(vec![-1.0]);
            return pts;
        }
        2 => {
            for j in 0..count {
                let t = std::f64::consts::TAU * j as f64 / count as f64;
                pts.push(vec![t.cos(), t.sin()]);
            }
        }
        3 => {
            // Fibonacci lattice
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            for j in 0..count {
                let z = 1.0 - 2.0 * (j as f64 + 0.5) / count as f64;
                let r = (1.0 - z * z).sqrt();
                let phi = golden * j as f64;
                pts.push(vec![r * phi.cos(), r * phi.sin(), z]);
            }
        }
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0000 + dim as u64);
            for _ in 0..count {
                let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
                let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                pts.push(v.into_iter().map(|x| x / norm).collect());
            }
        }
    }
    for i in 0..dim {
        for s in [1.0, -1.0] {
            let mut e = vec![0.0; dim];
            e[i] = s;
            pts.push(e);
        }
    }
    let d = 1.0 / (dim as f64).sqrt();
    pts.push(vec![d; dim]);
    pts.push(vec![-d; dim]);
    pts
}

fn sphere_min(form: &Polynomial, samples: usize) -> (f64, Vec<f64>) {
    sphere_points(form.dim(), samples)
        .into_iter()
        .map(|pt| (form.eval_unchecked(&pt), pt))
        .fold((f64::INFINITY, Vec::new()), |best, cand| {
            if cand.0 < best.0 {
                cand
            } else {
                best
            }
        })
}

fn zero_tol(form: &Polynomial) -> f64 {
    SPHERE_ZERO_TOL * form.terms().map(|(_, c)| c.abs()).sum::<f64>().max(f64::MIN_POSITIVE)
}

/// Outcome of the sampled P_{2k} membership test.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct P2kDecision {
    pub member: bool,
    pub min_on_sphere: f64,
}

/// Tests `p ∈ P_{2k}`: degree exactly 2k with a degree-2k leading form that is
/// strictly positive on the sampled unit sphere.
///
/// Sampling can refute membership soundly; a positive answer is only as fine
/// as the sphere resolution.
pub fn is_in_p2k(p: &Polynomial, k: u32, sphere_samples: usize) -> Result<P2kDecision, PolyError> {
    if k == 0 {
        return Err(PolyError::InvalidArgument("k must be at least 1".into()));
    }
    let deg = p.degree();
    if deg > 2 * k {
        return Err(PolyError::DegreeTooHigh {
            degree: deg,
            max: 2 * k,
        });
    }
    let form = p.leading_form(2 * k);
    let (min, _) = sphere_min(&form, sphere_samples.max(DEFAULT_SPHERE_SAMPLES));
    let min = if form.is_zero() { 0.0 } else { min };
    Ok(P2kDecision {
        member: deg == 2 * k && min > zero_tol(&form),
        min_on_sphere: min,
    })
}

/// Outcome of [`is_strictly_positive`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PositivityCertificate {
    pub certified: bool,
    /// Smallest value found; a global-minimum candidate when certified.
    pub witness_min: f64,
    pub witness_point: Vec<f64>,
    /// Quasi-radius outside of which the leading part dominates.
    pub radius: f64,
    /// Quasi-homogeneous weights per variable (empty if not coercive).
    pub weights: Vec<u32>,
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Per-variable weights making `p` quasi-homogeneously coercive: variable `i`
/// with top pure power `e_i` gets weight `L / e_i`, `L = lcm(e_i)`.
fn quasi_weights(p: &Polynomial) -> Option<(Vec<u32>, u32)> {
    let dim = p.dim();
    let mut pure = vec![0u32; dim];
    for (alpha, _) in p.terms() {
        let nz: Vec<usize> = (0..dim).filter(|&i| alpha[i] > 0).collect();
        if nz.len() == 1 {
            let i = nz[0];
            pure[i] = pure[i].max(alpha[i]);
        }
    }
    if pure.iter().any(|&e| e == 0 || e % 2 == 1) {
        return None;
    }
    let lcm = pure.iter().fold(1u32, |l, &e| l / gcd(l, e) * e);
    let weights: Vec<u32> = pure.iter().map(|&e| lcm / e).collect();
    Some((weights, lcm))
}

fn weighted_degree(alpha: &[u32], w: &[u32]) -> u32 {
    alpha.iter().zip(w).map(|(a, b)| a * b).sum()
}

/// Certifies `p > 0` on all of `R^dim`.
///
/// The polynomial is split as `Q + R` where `Q` is its quasi-homogeneous top
/// part. With `m = min Q` on the sampled sphere and `B = Σ|coefficients of R|`,
/// `p > 0` outside quasi-radius `B/m`; inside, a grid search followed by
/// gradient descent looks for the global minimum.
pub fn is_strictly_positive(p: &Polynomial, probe_budget: usize) -> PositivityCertificate {
    let dim = p.dim();
    if let Some(c) = p.as_constant() {
        return PositivityCertificate {
            certified: c > 0.0,
            witness_min: c,
            witness_point: vec![0.0; dim],
            radius: 0.0,
            weights: vec![1; dim],
        };
    }
    let budget = probe_budget.max(16);
    let coercive = quasi_weights(p).and_then(|(w, top)| {
        if p.terms().any(|(a, _)| weighted_degree(a, &w) > top) {
            return None;
        }
        let lead = Polynomial::from_terms(
            dim,
            p.terms()
                .filter(|(a, _)| weighted_degree(a, &w) == top)
                .map(|(a, c)| (a.clone(), c)),
        );
        let (m, _) = sphere_min(&lead, DEFAULT_SPHERE_SAMPLES);
        if m <= zero_tol(&lead) {
            return None;
        }
        let lower: f64 = p
            .terms()
            .filter(|(a, _)| weighted_degree(a, &w) < top)
            .map(|(_, c)| c.abs())
            .sum();
        Some((w, (1.05 * lower / m).max(1.0)))
    });

    let (weights, radius) = match coercive {
        Some(wr) => wr,
        None => {
            // not coercive: probe the unit box for a witness, never certify
            let (v, pt) = grid_then_descend(p, &vec![1.0; dim], budget);
            return PositivityCertificate {
                certified: false,
                witness_min: v,
                witness_point: pt,
                radius: f64::INFINITY,
                weights: Vec::new(),
            };
        }
    };
    let half_widths: Vec<f64> = weights.iter().map(|&w| radius.powi(w as i32)).collect();
    let (v, pt) = grid_then_descend(p, &half_widths, budget);
    PositivityCertificate {
        certified: v > 0.0,
        witness_min: v,
        witness_point: pt,
        radius,
        weights,
    }
}

fn grid_then_descend(p: &Polynomial, half_widths: &[f64], budget: usize) -> (f64, Vec<f64>) {
    let dim = p.dim();
    let mut per_axis = ((budget as f64).powf(1.0 / dim as f64).floor() as usize).max(3);
    if per_axis % 2 == 0 {
        per_axis += 1;
    }
    let total = per_axis.pow(dim as u32);
    let mut best: Vec<(f64, Vec<f64>)> = Vec::new();
    const KEEP: usize = 8;
    let mut pt = vec![0.0; dim];
    for flat in 0..total {
        let mut rem = flat;
        for (i, h) in half_widths.iter().enumerate() {
            let j = rem % per_axis;
            rem /= per_axis;
            pt[i] = -h + 2.0 * h * j as f64 / (per_axis - 1) as f64;
        }
        let v = p.eval_unchecked(&pt);
        if best.len() < KEEP || v < best[best.len() - 1].0 {
            best.push((v, pt.clone()));
            best.sort_by(|a, b| a.0.total_cmp(&b.0));
            best.truncate(KEEP);
        }
    }
    let grad = p.gradient();
    best.into_iter()
        .map(|(v, x)| descend(p, &grad, v, x))
        .fold((f64::INFINITY, Vec::new()), |a, b| if b.0 < a.0 { b } else { a })
}

/// Gradient descent with Armijo backtracking; returns the lowest point visited.
fn descend(p: &Polynomial, grad: &[Polynomial], mut v: f64, mut x: Vec<f64>) -> (f64, Vec<f64>) {
    for _ in 0..300 {
        let g: Vec<f64> = grad.iter().map(|gi| gi.eval_unchecked(&x)).collect();
        let gn2: f64 = g.iter().map(|a| a * a).sum();
        if gn2 < 1e-28 {
            break;
        }
        let mut step = 1.0 / gn2.sqrt();
        let mut moved = false;
        for _ in 0..60 {
            let cand: Vec<f64> = x.iter().zip(&g).map(|(xi, gi)| xi - step * gi).collect();
            let cv = p.eval_unchecked(&cand);
            if cv <= v - 1e-4 * step * gn2 {
                x = cand;
                v = cv;
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if !moved {
            break;
        }
    }
    (v, x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polycore::VarLayout;

    fn parse(t: &str, l: VarLayout) -> Polynomial {
        Polynomial::parse(t, l).unwrap()
    }

    #[test]
    fn p2k_examples() {
        let d = is_in_p2k(&parse("x1^4 - x1^3", VarLayout::X(1)), 2, 10_000).unwrap();
        assert!(d.member);
        assert_eq!(d.min_on_sphere, 1.0);

        let d = is_in_p2k(&parse("x1^2 * x2^2", VarLayout::X(2)), 2, 10_000).unwrap();
        assert!(!d.member);

        let d = is_in_p2k(&parse("x1^2 + x2^2 - 100", VarLayout::X(2)), 1, 10_000).unwrap();
        assert!(d.member);
        assert!((d.min_on_sphere - 1.0).abs() < 1e-12);
    }

    #[test]
    fn p2k_rejects_high_degree_and_low_degree() {
        let p = parse("x1^6", VarLayout::X(1));
        assert!(matches!(is_in_p2k(&p, 2, 100), Err(PolyError::DegreeTooHigh { .. })));
        let q = parse("x1^2 + 1", VarLayout::X(1));
        assert!(!is_in_p2k(&q, 2, 100).unwrap().member);
        let odd = parse("x1^3", VarLayout::X(1));
        assert!(!is_in_p2k(&odd, 2, 100).unwrap().member);
    }

    #[test]
    fn positivity_examples() {
        let c = is_strictly_positive(&parse("1 + x1^2 + xi1^2", VarLayout::Joint(1)), 10_000);
        assert!(c.certified);
        assert_eq!(c.witness_min, 1.0);

        let c = is_strictly_positive(&parse("x1^2 - 1", VarLayout::X(1)), 10_000);
        assert!(!c.certified);
        assert_eq!(c.witness_min, -1.0);
        assert!(c.witness_point[0].abs() < 1e-12);

        let w = parse("1 + x1^4 + xi1^2", VarLayout::Joint(1));
        let c = is_strictly_positive(&w, 10_000);
        assert!(c.certified);
        assert_eq!(c.witness_min, 1.0);
        assert_eq!(c.weights, vec![1, 2]);
    }

    #[test]
    fn positivity_2d_quartic_weight() {
        let w = parse("1 + x1^4 + 2 * x1^2 * x2^2 + x2^4 + xi1^2 + xi2^2", VarLayout::Joint(2));
        let c = is_strictly_positive(&w, 10_000);
        assert!(c.certified);
        assert!((c.witness_min - 1.0).abs() < 1e-12);
    }

    #[test]
    fn double_well_found_negative() {
        // min of (x^2-4)^2/4 - 1 is -1 at x = ±2
        let p = parse("0.25 * x1^4 - 2 * x1^2 + 3", VarLayout::X(1));
        let c = is_strictly_positive(&p, 1000);
        assert!(!c.certified);
        assert!((c.witness_min + 1.0).abs() < 1e-9);
        assert!((c.witness_point[0].abs() - 2.0).abs() < 1e-4);
    }

    #[test]
    fn non_coercive_never_certified() {
        let p = parse("x1^2 * x2^2 + 1", VarLayout::X(2));
        assert!(!is_strictly_positive(&p, 1000).certified);
    }

    #[test]
    fn sphere_points_are_unit() {
        for dim in 1..=6 {
            for pt in sphere_points(dim, 200) {
                let n: f64 = pt.iter().map(|x| x * x).sum();
                assert!((n - 1.0).abs() < 1e-12);
            }
        }
    }
}
