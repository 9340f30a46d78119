use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{PhaseGrid, QuantizeError};
use crate::hmetric::fnv1a;
use crate::polycore::SymbolExpr;

/// Largest `|a(x, ±L_ξ)|` allowed, relative to `max |a|` on the grid.
pub const DECAY_TOL: f64 = 1e-3;

/// Dense matrix of `a_t(x, D)` on the `x` grid, scaled by `Δx` so that its
/// trace approximates the operator trace.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantizedOperator {
    pub matrix: DMatrix<Complex64>,
    pub t: f64,
    pub grid: PhaseGrid,
    pub symbol_hash: String,
}

/// Quantization parameters supported by the tabulated kernel. For these the
/// evaluation point `t x_i + (1−t) x_j` lies on the half-step grid.
fn check_t(t: f64) -> Result<(), QuantizeError> {
    if t == 0.0 || t == 0.5 || t == 1.0 {
        Ok(())
    } else {
        Err(QuantizeError::UnsupportedT(t))
    }
}

pub fn symbol_hash(a: &SymbolExpr) -> String {
    format!("{:016x}", fnv1a(format!("{:?}", a.node()).as_bytes()))
}

/// `t`-quantization of a decaying 1D symbol.
pub fn quantize(a: &SymbolExpr, t: f64, grid: &PhaseGrid) -> Result<QuantizedOperator, QuantizeError> {
    if a.n() != 1 {
        return Err(QuantizeError::Dimension(a.n()));
    }
    grid.validate()?;
    check_t(t)?;
    let eval = |x: f64, xi: f64| Complex64::new(a.eval2(x, xi).unwrap_or(f64::NAN), 0.0);
    let table = tabulate(&eval, grid);
    let peak = table
        .iter()
        .flat_map(|row| row.iter().map(|v| v.norm()))
        .fold(0.0f64, |m, v| if v.is_nan() { f64::NAN } else { m.max(v) });
    let edge = half_step_points(grid)
        .map(|z| eval(z, grid.lxi).norm().max(eval(z, -grid.lxi).norm()))
        .fold(0.0f64, f64::max);
    if !peak.is_finite() || edge > DECAY_TOL * peak {
        return Err(QuantizeError::NoDecay {
            ratio: if peak > 0.0 { edge / peak } else { f64::INFINITY },
        });
    }
    Ok(assemble(&table, t, grid, symbol_hash(a)))
}

/// `t`-quantization of an arbitrary complex symbol, without the decay check.
pub fn quantize_fn<F>(a: F, t: f64, grid: &PhaseGrid, symbol_hash: String) -> Result<QuantizedOperator, QuantizeError>
where
    F: Fn(f64, f64) -> Complex64 + Sync,
{
    grid.validate()?;
    check_t(t)?;
    let table = tabulate(&a, grid);
    Ok(assemble(&table, t, grid, symbol_hash))
}

/// `z_s = −L + (s/2 + ½)Δx` for `s = i + j`, the points `t x_i + (1−t) x_j`
/// can take.
fn half_step_points(grid: &PhaseGrid) -> impl Iterator<Item = f64> + '_ {
    let dx = grid.dx();
    (0..2 * grid.mx - 1).map(move |s| -grid.lx + (0.5 * s as f64 + 0.5) * dx)
}

fn tabulate<F>(a: &F, grid: &PhaseGrid) -> Vec<Vec<Complex64>>
where
    F: Fn(f64, f64) -> Complex64 + Sync,
{
    let xis = grid.xis();
    let zs: Vec<f64> = half_step_points(grid).collect();
    zs.par_iter()
        .map(|&z| xis.iter().map(|&xi| a(z, xi)).collect())
        .collect()
}

/// `K(x_i, x_j) = Σ_m a(t x_i + (1−t) x_j, ξ_m) e^{2πi(x_i−x_j)ξ_m} Δξ Δx`.
///
/// When `P = 1/(ΔxΔξ)` is an integer the phase is `P`-periodic in `m`, so
/// the symbol is first summed over residues mod `P`.
fn assemble(table: &[Vec<Complex64>], t: f64, grid: &PhaseGrid, symbol_hash: String) -> QuantizedOperator {
    let m = grid.mx;
    let (dx, dxi) = (grid.dx(), grid.dxi());
    let xis = grid.xis();
    let p = 1.0 / (dx * dxi);
    let period = if (p - p.round()).abs() < 1e-9 * p && (p.round() as usize) < grid.mxi {
        p.round() as usize
    } else {
        grid.mxi
    };
    let folded: Vec<Vec<Complex64>> = table
        .par_iter()
        .map(|row| {
            let mut f = vec![Complex64::new(0.0, 0.0); period];
            for (q, v) in row.iter().enumerate() {
                f[q % period] += v;
            }
            f
        })
        .collect();
    // phases by offset d = i − j
    let phase: Vec<Vec<Complex64>> = (0..2 * m - 1)
        .into_par_iter()
        .map(|k| {
            let d = k as f64 - (m - 1) as f64;
            xis[..period]
                .iter()
                .map(|&xi| Complex64::from_polar(dxi * dx, std::f64::consts::TAU * d * dx * xi))
                .collect()
        })
        .collect();
    let z_index = |i: usize, j: usize| -> usize {
        if t == 0.0 {
            2 * j
        } else if t == 1.0 {
            2 * i
        } else {
            i + j
        }
    };
    let rows: Vec<Vec<Complex64>> = (0..m)
        .into_par_iter()
        .map(|i| {
            (0..m)
                .map(|j| {
                    let a_row = &folded[z_index(i, j)];
                    let e_row = &phase[i + m - 1 - j];
                    a_row.iter().zip(e_row).map(|(a, e)| a * e).sum()
                })
                .collect()
        })
        .collect();
    QuantizedOperator {
        matrix: DMatrix::from_fn(m, m, |i, j| rows[i][j]),
        t,
        grid: *grid,
        symbol_hash,
    }
}

/// `Σ_i K(x_i, x_i) Δx`.
pub fn op_trace(q: &QuantizedOperator) -> Complex64 {
    q.matrix.diagonal().iter().sum()
}

/// Same value as [`op_trace`] of the assembled operator, from the diagonal
/// alone: on the diagonal the phase is 1 and the evaluation point is `x_i`
/// for every `t`.
pub fn grid_trace(a: &SymbolExpr, grid: &PhaseGrid) -> Result<f64, QuantizeError> {
    if a.n() != 1 {
        return Err(QuantizeError::Dimension(a.n()));
    }
    grid.validate()?;
    let xis = grid.xis();
    let rows: Vec<f64> = grid
        .xs()
        .par_iter()
        .map(|&x| xis.iter().map(|&xi| a.eval2(x, xi).unwrap_or(f64::NAN)).sum::<f64>())
        .collect();
    Ok(rows.iter().sum::<f64>() * grid.dx() * grid.dxi())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceReport {
    /// Grid and trace at each level of the refinement schedule.
    pub levels: Vec<(PhaseGrid, f64)>,
    pub value: f64,
    /// Change over the last refinement.
    pub error_estimate: f64,
    pub stabilized: bool,
}

/// Refines the grid (all four parameters doubled) until the trace changes by
/// less than `rel_tol`, up to `max_levels` grids.
pub fn converged_trace(
    a: &SymbolExpr,
    grid: &PhaseGrid,
    rel_tol: f64,
    max_levels: usize,
) -> Result<TraceReport, QuantizeError> {
    let mut g = *grid;
    let mut levels = vec![(g, grid_trace(a, &g)?)];
    let mut stabilized = false;
    while levels.len() < max_levels.max(2) {
        g = g.refined();
        let v = grid_trace(a, &g)?;
        let prev = levels.last().unwrap().1;
        levels.push((g, v));
        if (v - prev).abs() <= rel_tol * v.abs() {
            stabilized = true;
            break;
        }
    }
    let n = levels.len();
    Ok(TraceReport {
        value: levels[n - 1].1,
        error_estimate: (levels[n - 1].1 - levels[n - 2].1).abs(),
        levels,
        stabilized,
    })
}

/// Singular values agreeing to [`RESOLVED_TOL`] between two `x` resolutions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResolvedSingularValues {
    /// Descending values from the coarse grid.
    pub values: Vec<f64>,
    /// Length of the leading run that the fine grid reproduces.
    pub resolved: usize,
    pub grid: PhaseGrid,
    pub fine_grid: PhaseGrid,
}

impl ResolvedSingularValues {
    pub fn resolved_values(&self) -> &[f64] {
        &self.values[..self.resolved]
    }
}

pub const RESOLVED_TOL: f64 = 1e-5;

/// Singular values of `a_t(x, D)` on the spectral grids with `mx` and
/// `fine_mx` points on `[−L_x, L_x]`. Finite frequency range and box size
/// make the small singular values unreliable; the comparison marks where.
pub fn resolved_singular_values(
    a: &SymbolExpr,
    t: f64,
    lx: f64,
    mx: usize,
    fine_mx: usize,
) -> Result<ResolvedSingularValues, QuantizeError> {
    if fine_mx <= mx {
        return Err(QuantizeError::InvalidGrid("fine grid must have more points".into()));
    }
    let grid = PhaseGrid::spectral(lx, mx)?;
    let fine_grid = PhaseGrid::spectral(lx, fine_mx)?;
    let values = crate::specfn::singular_values(&quantize(a, t, &grid)?.matrix);
    let fine = crate::specfn::singular_values(&quantize(a, t, &fine_grid)?.matrix);
    let resolved = values
        .iter()
        .zip(&fine)
        .take_while(|(c, f)| (*c - *f).abs() <= RESOLVED_TOL * f.abs())
        .count();
    Ok(ResolvedSingularValues {
        values,
        resolved,
        grid,
        fine_grid,
    })
}

impl QuantizedOperator {
    pub fn is_hermitian(&self, rel_tol: f64) -> bool {
        let m = &self.matrix;
        let scale = m.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let n = m.nrows();
        (0..n).all(|i| (0..n).all(|j| (m[(i, j)] - m[(j, i)].conj()).norm() <= rel_tol * scale))
    }

    /// Row-major binary64 with interleaved real and imaginary parts, little
    /// endian, plus `<path>.hdr` describing the layout.
    pub fn export(&self, path: &Path) -> Result<(), QuantizeError> {
        let n = self.matrix.nrows();
        let mut bytes = Vec::with_capacity(n * n * 16);
        for i in 0..n {
            for j in 0..n {
                let v = self.matrix[(i, j)];
                bytes.extend_from_slice(&v.re.to_le_bytes());
                bytes.extend_from_slice(&v.im.to_le_bytes());
            }
        }
        std::fs::write(path, bytes).map_err(|e| QuantizeError::Io(e.to_string()))?;
        let header = format!(
            "format row-major complex binary64 le interleaved\nrows {n}\ncols {n}\nt {:?}\nlx {:?}\nmx {}\nlxi {:?}\nmxi {}\nsymbol_hash {}\n",
            self.t, self.grid.lx, self.grid.mx, self.grid.lxi, self.grid.mxi, self.symbol_hash
        );
        let mut hdr = path.as_os_str().to_owned();
        hdr.push(".hdr");
        std::fs::File::create(&hdr)
            .and_then(|mut f| f.write_all(header.as_bytes()))
            .map_err(|e| QuantizeError::Io(e.to_string()))
    }
}
