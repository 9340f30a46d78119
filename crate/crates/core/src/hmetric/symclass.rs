//! Sampled symbol-class estimates against `Λ = (1 + |x|^{2k} + |ξ|^{2ℓ})^{1/2}`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::polycore::{sphere_points, PolyError, SymbolExpr};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SymbolClassError {
    #[error("order fit needs at least 3 shells with nonzero values, got {shells}")]
    DegenerateFit { shells: usize },
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// Dyadic Euclidean shells `2^j ≤ |(x, ξ)| ≤ 2^{j+1}` for `j_min ≤ j ≤ j_max`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShellGrid {
    pub j_min: i32,
    pub j_max: i32,
    pub radial: usize,
    pub angular: usize,
}

impl ShellGrid {
    pub fn membership_default() -> Self {
        ShellGrid {
            j_min: 0,
            j_max: 10,
            radial: 8,
            angular: 720,
        }
    }

    pub fn order_default() -> Self {
        ShellGrid {
            j_min: 2,
            j_max: 12,
            radial: 8,
            angular: 720,
        }
    }

    fn shells(&self) -> usize {
        (self.j_max - self.j_min + 1).max(0) as usize
    }

    /// Points of shell `j` (radii include both ends).
    fn shell_points(&self, j: i32, dirs: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let mut out = Vec::with_capacity(dirs.len() * (self.radial + 1));
        for i in 0..=self.radial {
            let r = 2f64.powf(j as f64 + i as f64 / self.radial as f64);
            out.extend(dirs.iter().map(|d| d.iter().map(|c| c * r).collect()));
        }
        out
    }

    /// Points of the ball `|X| < 2^{j_min}`, origin included.
    fn core_points(&self, dirs: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let r0 = 2f64.powi(self.j_min);
        let mut out = vec![vec![0.0; dirs[0].len()]];
        for i in 1..self.radial {
            let r = r0 * i as f64 / self.radial as f64;
            out.extend(dirs.iter().map(|d| d.iter().map(|c| c * r).collect()));
        }
        out
    }
}

fn big_lambda(pt: &[f64], n: usize, k: u32, l: u32) -> f64 {
    let (x, xi) = pt.split_at(n);
    let x2: f64 = x.iter().map(|v| v * v).sum();
    let xi2: f64 = xi.iter().map(|v| v * v).sum();
    (1.0 + x2.powi(k as i32) + xi2.powi(l as i32)).sqrt()
}

/// One row of the seminorm table: `sup |∂_x^β ∂_ξ^α a| / Λ^{exponent}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Seminorm {
    pub alpha: Vec<u32>,
    pub beta: Vec<u32>,
    pub exponent: f64,
    pub sup: f64,
    /// `sup` divided by the coefficient normaliser.
    pub normalized: f64,
    /// Running sup after the core ball and each shell.
    pub running_sup: Vec<f64>,
    pub bounded: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SigmaReport {
    pub k: u32,
    pub l: u32,
    pub m: f64,
    pub max_order: u32,
    pub normalizer: f64,
    pub bounded: bool,
    pub seminorms: Vec<Seminorm>,
    pub note: String,
}

/// Allowed growth of the running sup across each of the last two shells.
pub const PLATEAU_TOLERANCE: f64 = 1.05;

fn multi_indices(n: usize, max: u32) -> Vec<Vec<u32>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|v: Vec<u32>| {
                let used: u32 = v.iter().sum();
                (0..=max - used).map(move |e| {
                    let mut w = v.clone();
                    w.push(e);
                    w
                })
            })
            .collect();
    }
    out
}

/// Sampled check of `a ∈ Σ^m_{k,ℓ}` for all derivatives up to `max_order`.
///
/// A seminorm is bounded when its running sup grows by at most
/// [`PLATEAU_TOLERANCE`] over each of the last two shells.
pub fn sigma_membership(
    a: &SymbolExpr,
    k: u32,
    l: u32,
    m: f64,
    max_order: u32,
    grid: &ShellGrid,
    normalizer: f64,
) -> Result<SigmaReport, SymbolClassError> {
    let n = a.n();
    let dirs = sphere_points(2 * n, grid.angular);
    let mut blocks = vec![grid.core_points(&dirs)];
    for j in grid.j_min..=grid.j_max {
        blocks.push(grid.shell_points(j, &dirs));
    }
    let lambdas: Vec<Vec<f64>> = blocks
        .iter()
        .map(|b| b.iter().map(|p| big_lambda(p, n, k, l)).collect())
        .collect();

    let mut pairs = Vec::new();
    for beta in multi_indices(n, max_order) {
        let used: u32 = beta.iter().sum();
        for alpha in multi_indices(n, max_order - used) {
            pairs.push((alpha, beta.clone()));
        }
    }
    let lam_exp = (k + l) as f64 * m / (k * l) as f64;
    let seminorms = pairs
        .into_par_iter()
        .map(|(alpha, beta)| {
            let d = a.partial_with_max(&alpha, &beta, max_order)?;
            let exponent = lam_exp
                - beta.iter().sum::<u32>() as f64 / k as f64
                - alpha.iter().sum::<u32>() as f64 / l as f64;
            let mut running = Vec::with_capacity(blocks.len());
            let mut sup = 0.0f64;
            for (pts, lams) in blocks.iter().zip(&lambdas) {
                for (p, lam) in pts.iter().zip(lams) {
                    sup = sup.max(d.eval(p)?.abs() / lam.powf(exponent));
                }
                running.push(sup);
            }
            let grows = |hi: f64, lo: f64| hi > PLATEAU_TOLERANCE * lo;
            let len = running.len();
            let bounded = sup.is_finite()
                && !(len >= 2 && grows(running[len - 1], running[len - 2]))
                && !(len >= 3 && grows(running[len - 2], running[len - 3]));
            Ok(Seminorm {
                alpha,
                beta,
                exponent,
                sup,
                normalized: sup / normalizer,
                running_sup: running,
                bounded,
            })
        })
        .collect::<Result<Vec<_>, SymbolClassError>>()?;
    Ok(SigmaReport {
        k,
        l,
        m,
        max_order,
        normalizer,
        bounded: seminorms.iter().all(|s| s.bounded),
        seminorms,
        note: "sampled plateau test on dyadic shells; can refute, not prove, membership".into(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderEstimate {
    pub order: f64,
    pub residual_rms: f64,
    pub shells_used: usize,
}

/// Least-squares slope of `log sup_shell |a|` against `log λ` at the maximiser,
/// with `λ = Λ^{(k+ℓ)/(kℓ)}`.
pub fn estimate_order(
    a: &SymbolExpr,
    k: u32,
    l: u32,
    grid: &ShellGrid,
) -> Result<OrderEstimate, SymbolClassError> {
    let n = a.n();
    let dirs = sphere_points(2 * n, grid.angular);
    let lam_exp = (k + l) as f64 / (k * l) as f64;
    let pts: Vec<(f64, f64)> = (grid.j_min..=grid.j_max)
        .into_par_iter()
        .map(|j| -> Result<Option<(f64, f64)>, SymbolClassError> {
            let mut best = (0.0f64, 1.0f64);
            for p in grid.shell_points(j, &dirs) {
                let v = a.eval(&p)?.abs();
                if v > best.0 {
                    best = (v, big_lambda(&p, n, k, l).powf(lam_exp));
                }
            }
            Ok((best.0 > 0.0).then(|| (best.1.ln(), best.0.ln())))
        })
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .flatten()
        .collect();
    if pts.len() < 3 || grid.shells() < 3 {
        return Err(SymbolClassError::DegenerateFit { shells: pts.len() });
    }
    let (slope, intercept) = least_squares(&pts);
    let rms = (pts
        .iter()
        .map(|(x, y)| (y - slope * x - intercept).powi(2))
        .sum::<f64>()
        / pts.len() as f64)
        .sqrt();
    Ok(OrderEstimate {
        order: slope,
        residual_rms: rms,
        shells_used: pts.len(),
    })
}

/// Ordinary least-squares line `y = slope·x + intercept`.
pub(crate) fn least_squares(pts: &[(f64, f64)]) -> (f64, f64) {
    let len = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / len;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / len;
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quartic() -> SymbolExpr {
        SymbolExpr::parse_poly("x1^4 + xi1^2", 1).unwrap()
    }

    #[test]
    fn constant_symbol_is_order_zero() {
        let one = SymbolExpr::constant(1, 1.0);
        let r = sigma_membership(&one, 2, 1, 0.0, 2, &ShellGrid::membership_default(), 1.0)
            .unwrap();
        assert!(r.bounded);
        assert_eq!(r.seminorms[0].sup, 1.0);
    }

    #[test]
    fn quartic_plateau() {
        let g = ShellGrid::membership_default();
        assert!(sigma_membership(&quartic(), 2, 1, 4.0 / 3.0, 4, &g, 1.0).unwrap().bounded);
        assert!(!sigma_membership(&quartic(), 2, 1, 1.0, 4, &g, 1.0).unwrap().bounded);
    }

    #[test]
    fn order_estimates() {
        let g = ShellGrid::order_default();
        let m = estimate_order(&quartic(), 2, 1, &g).unwrap().order;
        assert!((m - 4.0 / 3.0).abs() < 0.05, "{m}");
        let h = SymbolExpr::parse_poly("x1^2 + xi1^2", 1).unwrap();
        let m = estimate_order(&h, 1, 1, &g).unwrap().order;
        assert!((m - 1.0).abs() < 0.05, "{m}");
        let w = SymbolExpr::power(SymbolExpr::parse_poly("1 + x1^2 + xi1^2", 1).unwrap(), -2.0)
            .unwrap();
        let m = estimate_order(&w, 1, 1, &g).unwrap().order;
        assert!((m + 2.0).abs() < 0.05, "{m}");
    }

    #[test]
    fn too_few_shells() {
        let g = ShellGrid {
            j_min: 0,
            j_max: 1,
            ..ShellGrid::order_default()
        };
        assert!(matches!(
            estimate_order(&quartic(), 2, 1, &g),
            Err(SymbolClassError::DegenerateFit { .. })
        ));
    }

    #[test]
    fn index_enumeration() {
        assert_eq!(multi_indices(1, 3).len(), 4);
        assert_eq!(multi_indices(2, 2).len(), 6);
    }
}
