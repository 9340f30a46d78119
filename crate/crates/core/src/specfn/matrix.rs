//! Schatten quasi-norms and the inequalities between eigenvalues, singular
//! values and products of matrices.

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Singular values in descending order.
pub fn singular_values(m: &DMatrix<Complex64>) -> Vec<f64> {
    let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Eigenvalues of a general square matrix, ordered by decreasing modulus.
pub fn eigenvalues(m: &DMatrix<Complex64>) -> Vec<Complex64> {
    let mut ev: Vec<Complex64> = m.clone().schur().eigenvalues().map(|v| v.iter().copied().collect()).unwrap_or_default();
    ev.sort_by(|a, b| b.norm().total_cmp(&a.norm()));
    ev
}

/// `(Σ s_j^p)^{1/p}`, a quasi-norm for `p < 1`.
pub fn schatten_norm(singular: &[f64], p: f64) -> f64 {
    singular.iter().map(|s| s.powf(p)).sum::<f64>().powf(1.0 / p)
}

/// `Σ s_j^p − Σ |λ_j|^p`, relative to the first sum. Non-negative by the
/// Weyl inequality.
pub fn weyl_slack(eigen: &[Complex64], singular: &[f64], p: f64) -> f64 {
    let s: f64 = singular.iter().map(|v| v.powf(p)).sum();
    let e: f64 = eigen.iter().map(|v| v.norm().powf(p)).sum();
    if s == 0.0 {
        -e
    } else {
        (s - e) / s
    }
}

/// `‖s‖_p − ‖s‖_q` for `p < q`, relative to `‖s‖_p`.
pub fn nesting_slack(singular: &[f64], p: f64, q: f64) -> f64 {
    let a = schatten_norm(singular, p);
    let b = schatten_norm(singular, q);
    if a == 0.0 {
        -b
    } else {
        (a - b) / a
    }
}

/// `‖A‖_p ‖B‖_q − ‖AB‖_r` with `1/r = 1/p + 1/q`, relative to the bound.
pub fn holder_slack(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>, p: f64, q: f64) -> f64 {
    let r = 1.0 / (1.0 / p + 1.0 / q);
    let bound = schatten_norm(&singular_values(a), p) * schatten_norm(&singular_values(b), q);
    let prod = schatten_norm(&singular_values(&(a * b)), r);
    if bound == 0.0 {
        -prod
    } else {
        (bound - prod) / bound
    }
}
