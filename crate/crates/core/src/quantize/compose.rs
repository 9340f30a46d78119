//! Exact Kohn–Nirenberg composition `a(D) ∘ b(x)` for polynomial symbols.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{quantize_fn, PhaseGrid, QuantizeError};
use crate::polycore::{Node, Polynomial, SymbolExpr};

/// One term `coefficient · ∂_ξ^α a · ∂_x^α b` of a composed symbol.
#[derive(Clone, Debug, PartialEq)]
pub struct ComposeTerm {
    pub alpha: Vec<u32>,
    pub coefficient: Complex64,
    /// Joint polynomial in `(x, ξ)`.
    pub poly: Polynomial,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComplexSymbol {
    pub n: usize,
    pub terms: Vec<ComposeTerm>,
}

impl ComplexSymbol {
    pub fn eval(&self, point: &[f64]) -> Complex64 {
        self.terms
            .iter()
            .map(|t| t.coefficient * t.poly.eval_unchecked(point))
            .sum()
    }

    /// Largest `|α|` among the terms.
    pub fn max_order(&self) -> u32 {
        self.terms.iter().map(|t| t.alpha.iter().sum()).max().unwrap_or(0)
    }
}

fn as_poly(a: &SymbolExpr, what: &str) -> Result<Polynomial, QuantizeError> {
    match a.node() {
        Node::Poly(p) => Ok(p.clone()),
        _ => Err(QuantizeError::NotPolynomial(what.into())),
    }
}

fn depends_on(p: &Polynomial, vars: std::ops::Range<usize>) -> bool {
    p.terms().any(|(alpha, _)| vars.clone().any(|v| alpha[v] > 0))
}

fn factorial(k: u32) -> f64 {
    (1..=k).map(f64::from).product()
}

/// `c = Σ_α (2πi)^{−|α|}/α! ∂_ξ^α a ∂_x^α b`, which is the full symbol of
/// `a(D) b(x)` when `a` depends on `ξ` only and `b` on `x` only. The sum
/// stops once either factor's derivative vanishes.
pub fn kn_compose_exact(a: &SymbolExpr, b: &SymbolExpr) -> Result<ComplexSymbol, QuantizeError> {
    if a.n() != b.n() {
        return Err(QuantizeError::Dimension(b.n()));
    }
    let n = a.n();
    let pa = as_poly(a, "a")?;
    let pb = as_poly(b, "b")?;
    if depends_on(&pa, 0..n) {
        return Err(QuantizeError::NotPolynomial("a must depend on ξ only".into()));
    }
    if depends_on(&pb, n..2 * n) {
        return Err(QuantizeError::NotPolynomial("b must depend on x only".into()));
    }
    let bound: Vec<u32> = (0..n).map(|i| pa.degree_in(n + i).min(pb.degree_in(i))).collect();
    let two_pi_i = Complex64::new(0.0, std::f64::consts::TAU);
    let mut terms = Vec::new();
    let mut alpha = vec![0u32; n];
    loop {
        let mut da = pa.clone();
        let mut db = pb.clone();
        for i in 0..n {
            da = da.partial(n + i, alpha[i])?;
            db = db.partial(i, alpha[i])?;
        }
        let poly = &da * &db;
        if !poly.is_zero() {
            let order: u32 = alpha.iter().sum();
            let fact: f64 = alpha.iter().map(|&k| factorial(k)).product();
            terms.push(ComposeTerm {
                alpha: alpha.clone(),
                coefficient: two_pi_i.powi(-(order as i32)) / fact,
                poly,
            });
        }
        // next multi-index in the box α ≤ bound
        let mut i = 0;
        while i < n && alpha[i] == bound[i] {
            alpha[i] = 0;
            i += 1;
        }
        if i == n {
            break;
        }
        alpha[i] += 1;
    }
    Ok(ComplexSymbol { n, terms })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompositionCheck {
    /// `‖(A B − C) P‖ / ‖C P‖` in the spectral norm.
    pub rel_error: f64,
    pub grid: PhaseGrid,
    /// Half-widths of the smooth window in `x` and `ξ`.
    pub window: (f64, f64),
    pub t: f64,
}

/// `exp(1 − 1/(1 − u²))` on `|u| < 1`, zero outside.
fn bump(u: f64) -> f64 {
    if u.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - u * u)).exp()
    }
}

/// Compares `Op(a) Op(b)` with `Op(c)` on test vectors cut off smoothly to
/// `|x| < window.0` and frequencies `|ξ| < window.1`.
///
/// The comparison uses the Kohn–Nirenberg quantization `t = 1`, which is the
/// one the expansion describes, on a grid with `L_ξ = 1/(2Δx)` so that the
/// matrices are exact Fourier multipliers on the grid.
pub fn composition_check(
    a: &SymbolExpr,
    b: &SymbolExpr,
    lx: f64,
    mx: usize,
    window: (f64, f64),
) -> Result<CompositionCheck, QuantizeError> {
    if a.n() != 1 {
        return Err(QuantizeError::Dimension(a.n()));
    }
    let c = kn_compose_exact(a, b)?;
    let grid = PhaseGrid::spectral(lx, mx)?;
    let t = 1.0;
    let real = |s: &SymbolExpr| {
        let s = s.clone();
        move |x: f64, xi: f64| Complex64::new(s.eval2(x, xi).unwrap_or(f64::NAN), 0.0)
    };
    let qa = quantize_fn(real(a), t, &grid, String::new())?;
    let qb = quantize_fn(real(b), t, &grid, String::new())?;
    let qc = quantize_fn(|x, xi| c.eval(&[x, xi]), t, &grid, String::new())?;
    let cutoff = quantize_fn(
        |x, xi| Complex64::new(bump(x / window.0) * bump(xi / window.1), 0.0),
        t,
        &grid,
        String::new(),
    )?;
    let product = &qa.matrix * &qb.matrix;
    let diff = (&product - &qc.matrix) * &cutoff.matrix;
    let reference = &qc.matrix * &cutoff.matrix;
    let norm = |m: &DMatrix<Complex64>| -> f64 {
        m.singular_values().iter().copied().fold(0.0, f64::max)
    };
    let denom = norm(&reference);
    Ok(CompositionCheck {
        rel_error: if denom > 0.0 { norm(&diff) / denom } else { f64::INFINITY },
        grid,
        window,
        t,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sym(text: &str) -> SymbolExpr {
        SymbolExpr::parse_poly(text, 1).unwrap()
    }

    #[test]
    fn first_order_correction() {
        let c = kn_compose_exact(&sym("xi1"), &sym("x1")).unwrap();
        assert_eq!(c.terms.len(), 2);
        let v = c.eval(&[0.0, 0.0]);
        let want = Complex64::new(0.0, std::f64::consts::TAU).inv();
        assert!((v - want).norm() < 1e-15);
        assert!((c.eval(&[2.0, 3.0]) - (want + 6.0)).norm() < 1e-14);
    }

    #[test]
    fn quadratic_terminates_at_two() {
        let c = kn_compose_exact(&sym("xi1^2"), &sym("x1^2")).unwrap();
        assert_eq!(c.terms.len(), 3);
        assert_eq!(c.max_order(), 2);
    }

    #[test]
    fn rejects_mixed_inputs() {
        assert!(kn_compose_exact(&sym("x1*xi1"), &sym("x1")).is_err());
        let p = SymbolExpr::power_uncertified(sym("1 + x1^2"), -1.0);
        assert!(kn_compose_exact(&sym("xi1"), &p).is_err());
    }
}
