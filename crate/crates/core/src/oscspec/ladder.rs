//! Position and momentum in the Hermite function basis.
//!
//! `x = (a + a†)/√2` and `D = −i∂ = i(a† − a)/√2`. Momentum is stored as the
//! real antisymmetric factor `A` with `D = iA`, so even powers of `D` are real.

use nalgebra::DMatrix;

/// `sqrt((j+1)/2)`, the ladder coefficient between `h_j` and `h_{j+1}`.
pub fn ladder_coefficient(j: usize) -> f64 {
    ((j + 1) as f64 / 2.0).sqrt()
}

/// Tridiagonal position matrix of the given size.
pub fn position_matrix(size: usize) -> DMatrix<f64> {
    let mut x = DMatrix::zeros(size, size);
    for j in 0..size.saturating_sub(1) {
        let c = ladder_coefficient(j);
        x[(j, j + 1)] = c;
        x[(j + 1, j)] = c;
    }
    x
}

/// Real antisymmetric `A` with `D = iA`: `A[j+1, j] = sqrt((j+1)/2)`.
pub fn momentum_factor(size: usize) -> DMatrix<f64> {
    let mut a = DMatrix::zeros(size, size);
    for j in 0..size.saturating_sub(1) {
        let c = ladder_coefficient(j);
        a[(j + 1, j)] = c;
        a[(j, j + 1)] = -c;
    }
    a
}

/// `D² = −A²`, real symmetric pentadiagonal.
pub fn momentum_squared(size: usize) -> DMatrix<f64> {
    let a = momentum_factor(size);
    -(&a * &a)
}

/// `M · T` for `T` with zero diagonal, `T[j+1, j] = lower[j]` and
/// `T[j, j+1] = upper[j]`.
fn mul_offdiagonal(m: &DMatrix<f64>, lower: &[f64], upper: &[f64]) -> DMatrix<f64> {
    let size = m.ncols();
    let mut out = DMatrix::zeros(m.nrows(), size);
    for j in 0..size {
        let mut col = out.column_mut(j);
        if j + 1 < size {
            col.axpy(lower[j], &m.column(j + 1), 1.0);
        }
        if j > 0 {
            col.axpy(upper[j - 1], &m.column(j - 1), 1.0);
        }
    }
    out
}

/// Powers `T^0 ..= T^max` of a zero-diagonal tridiagonal matrix.
fn tridiagonal_powers(size: usize, lower: &[f64], upper: &[f64], max: u32) -> Vec<DMatrix<f64>> {
    let mut out = vec![DMatrix::identity(size, size)];
    for _ in 0..max {
        let next = mul_offdiagonal(out.last().unwrap(), lower, upper);
        out.push(next);
    }
    out
}

/// `X^0 ..= X^max` at the given size.
pub fn position_powers(size: usize, max: u32) -> Vec<DMatrix<f64>> {
    let c: Vec<f64> = (0..size).map(ladder_coefficient).collect();
    tridiagonal_powers(size, &c, &c, max)
}

/// `A^0 ..= A^max` at the given size.
pub fn momentum_factor_powers(size: usize, max: u32) -> Vec<DMatrix<f64>> {
    let lower: Vec<f64> = (0..size).map(ladder_coefficient).collect();
    let upper: Vec<f64> = lower.iter().map(|c| -c).collect();
    tridiagonal_powers(size, &lower, &upper, max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ladder_entries() {
        let x = position_matrix(4);
        assert_eq!(x[(0, 1)], 0.7071067811865476);
        let x2 = &x * &x;
        assert!((x2[(0, 0)] - 0.5).abs() < 1e-15);
        assert!((momentum_squared(4)[(0, 0)] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn banded_powers_match_dense() {
        let x = position_matrix(12);
        let pows = position_powers(12, 4);
        let dense = &x * &x * &x * &x;
        assert!((&pows[4] - dense).amax() < 1e-13);
        let a = momentum_factor(12);
        let ap = momentum_factor_powers(12, 3);
        assert!((&ap[3] - &a * &a * &a).amax() < 1e-13);
    }

    #[test]
    fn gaussian_quartic_moment() {
        assert!((position_powers(8, 4)[4][(0, 0)] - 0.75).abs() < 1e-15);
    }
}
