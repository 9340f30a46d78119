//! Dense real symmetric eigensolver: Householder tridiagonalisation followed
//! by implicit-shift QL iteration.

use nalgebra::DMatrix;

/// QL sweeps allowed per eigenvalue before giving up.
pub const MAX_QL_SWEEPS: usize = 50;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EigenError {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not symmetric (relative asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },
    #[error("QL iteration did not converge for eigenvalue {index} after {MAX_QL_SWEEPS} sweeps")]
    NoConvergence { index: usize },
    #[error("matrix contains non-finite entries")]
    NonFinite,
}

#[derive(Clone, Debug)]
pub struct Eigh {
    /// Ascending.
    pub values: Vec<f64>,
    /// Column `i` is the unit eigenvector for `values[i]`.
    pub vectors: Option<DMatrix<f64>>,
}

/// Largest `|M_ij − M_ji|` relative to the largest entry.
pub fn asymmetry(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let scale = m.amax().max(f64::MIN_POSITIVE);
    let mut worst = 0.0f64;
    for j in 0..n {
        for i in 0..j {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst / scale
}

/// Eigen-decomposition of a real symmetric matrix.
///
/// Only the lower triangle is read once symmetry (to `1e-10` relative) has
/// been checked.
pub fn eigh_dense(m: &DMatrix<f64>, want_vectors: bool) -> Result<Eigh, EigenError> {
    let (rows, cols) = m.shape();
    if rows != cols {
        return Err(EigenError::NotSquare { rows, cols });
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(EigenError::NonFinite);
    }
    let asym = asymmetry(m);
    if asym > 1e-10 {
        return Err(EigenError::NotSymmetric { asymmetry: asym });
    }
    let n = rows;
    if n == 0 {
        return Ok(Eigh {
            values: Vec::new(),
            vectors: want_vectors.then(|| DMatrix::zeros(0, 0)),
        });
    }
    // column-major working copy: v[c * n + r] is V[r][c]
    let mut v: Vec<f64> = m.as_slice().to_vec();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tred2(n, &mut v, &mut d, &mut e, want_vectors);
    tql2(n, &mut d, &mut e, want_vectors.then_some(&mut v[..]))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let values = order.iter().map(|&i| d[i]).collect();
    let vectors = want_vectors.then(|| {
        DMatrix::from_fn(n, n, |r, c| v[order[c] * n + r])
    });
    Ok(Eigh { values, vectors })
}

/// Eigenvalues of the symmetric tridiagonal matrix with diagonal `diag` and
/// off-diagonal `off` (`off[i]` couples `i` and `i+1`), ascending.
pub fn eigh_tridiagonal(diag: &[f64], off: &[f64]) -> Result<Vec<f64>, EigenError> {
    let n = diag.len();
    let mut d = diag.to_vec();
    // tql2 expects the sub-diagonal in e[1..n]
    let mut e = vec![0.0; n];
    for (i, &o) in off.iter().enumerate().take(n.saturating_sub(1)) {
        e[i + 1] = o;
    }
    tql2(n, &mut d, &mut e, None)?;
    d.sort_by(f64::total_cmp);
    Ok(d)
}

fn tred2(n: usize, v: &mut [f64], d: &mut [f64], e: &mut [f64], accumulate: bool) {
    let at = |r: usize, c: usize| c * n + r;
    for j in 0..n {
        d[j] = v[at(n - 1, j)];
    }
    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for dk in d.iter().take(i) {
            scale += dk.abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[at(i - 1, j)];
                v[at(i, j)] = 0.0;
                v[at(j, i)] = 0.0;
            }
        } else {
            for dk in d.iter_mut().take(i) {
                *dk /= scale;
                h += *dk * *dk;
            }
            let f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = 0.0;
            }
            for j in 0..i {
                let f = d[j];
                v[at(j, i)] = f;
                let mut g = e[j] + v[at(j, j)] * f;
                for k in j + 1..i {
                    let vkj = v[at(k, j)];
                    g += vkj * d[k];
                    e[k] += vkj * f;
                }
                e[j] = g;
            }
            let mut f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                let f = d[j];
                let g = e[j];
                let col = &mut v[j * n..j * n + i];
                for k in j..i {
                    col[k] -= f * e[k] + g * d[k];
                }
                d[j] = v[at(i - 1, j)];
                v[at(i, j)] = 0.0;
            }
        }
        d[i] = h;
    }
    if !accumulate {
        for j in 0..n {
            d[j] = v[at(j, j)];
        }
        e[0] = 0.0;
        return;
    }
    for i in 0..n - 1 {
        v[at(n - 1, i)] = v[at(i, i)];
        v[at(i, i)] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[at(k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[at(k, i + 1)] * v[at(k, j)];
                }
                for k in 0..=i {
                    v[at(k, j)] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[at(k, i + 1)] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[at(n - 1, j)];
        v[at(n - 1, j)] = 0.0;
    }
    v[at(n - 1, n - 1)] = 1.0;
    e[0] = 0.0;
}

fn tql2(n: usize, d: &mut [f64], e: &mut [f64], mut v: Option<&mut [f64]>) -> Result<(), EigenError> {
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    let mut f = 0.0;
    let mut tst1 = 0.0f64;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }
        if m > l {
            let mut sweeps = 0;
            loop {
                sweeps += 1;
                if sweeps > MAX_QL_SWEEPS {
                    return Err(EigenError::NoConvergence { index: l });
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if let Some(v) = v.as_deref_mut() {
                        let (lo, hi) = v.split_at_mut((i + 1) * n);
                        let ci = &mut lo[i * n..];
                        let ci1 = &mut hi[..n];
                        for k in 0..n {
                            let h = ci1[k];
                            ci1[k] = s * ci[k] + c * h;
                            ci[k] = c * ci[k] - s * h;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_symmetric(n: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = DMatrix::from_fn(n, n, |_, _| rng.random::<f64>() - 0.5);
        &a + a.transpose()
    }

    #[test]
    fn identity_and_diagonal() {
        let r = eigh_dense(&DMatrix::identity(4, 4), true).unwrap();
        assert_eq!(r.values, vec![1.0; 4]);
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![3.0, 1.0, 2.0]));
        assert_eq!(eigh_dense(&d, false).unwrap().values, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn random_residual_and_orthogonality() {
        let m = random_symmetric(50, 7);
        let r = eigh_dense(&m, true).unwrap();
        let v = r.vectors.unwrap();
        let norm = m.norm();
        for (i, &lam) in r.values.iter().enumerate() {
            let col = v.column(i);
            let res = (&m * col - col * lam).norm();
            assert!(res <= 1e-10 * norm, "residual {res}");
        }
        let gram = v.transpose() * &v;
        assert!((gram - DMatrix::identity(50, 50)).amax() < 1e-10);
    }

    #[test]
    fn agrees_with_nalgebra() {
        let m = random_symmetric(40, 11);
        let ours = eigh_dense(&m, false).unwrap().values;
        let mut theirs: Vec<f64> = m.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
        theirs.sort_by(f64::total_cmp);
        for (a, b) in ours.iter().zip(&theirs) {
            assert!((a - b).abs() < 1e-12);
        }
        let with_vectors = eigh_dense(&m, true).unwrap().values;
        for (a, b) in ours.iter().zip(&with_vectors) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn tridiagonal_path() {
        // second difference matrix: eigenvalues 2 - 2cos(jπ/(n+1))
        let n = 30;
        let vals = eigh_tridiagonal(&vec![2.0; n], &vec![-1.0; n - 1]).unwrap();
        for (j, v) in vals.iter().enumerate() {
            let exact = 2.0 - 2.0 * ((j + 1) as f64 * std::f64::consts::PI / (n + 1) as f64).cos();
            assert!((v - exact).abs() < 1e-13);
        }
    }

    #[test]
    fn rejects_asymmetric() {
        let mut m = DMatrix::identity(3, 3);
        m[(0, 1)] = 1.0;
        assert!(matches!(eigh_dense(&m, false), Err(EigenError::NotSymmetric { .. })));
    }
}
