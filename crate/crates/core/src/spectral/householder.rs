//! Householder tridiagonalization followed by implicit QL iteration.
//!
//! Used for large Nyström matrices, where cyclic Jacobi costs too many sweeps
//! of `O(n³)` work. Both stages keep every inner loop on contiguous rows.

use crate::error::{KlError, Result};
use crate::linalg::Matrix;

use super::jacobi::{rotate_rows, sorted_descending, symmetrized, SymmetricEigen};

const MAX_QL_ITERATIONS: usize = 60;

/// Full eigendecomposition, eigenvalues descending.
pub fn householder_ql_eigen(a: &Matrix) -> Result<SymmetricEigen> {
    let (values, rows) = householder_ql_rows(a)?;
    Ok(sorted_descending(values, rows))
}

/// Eigenvalues only, descending.
pub fn householder_ql_eigenvalues(a: &Matrix) -> Result<Vec<f64>> {
    let mut work = symmetrized(a)?;
    let (mut d, mut e, _) = tridiagonalize(&mut work, false);
    implicit_ql(&mut d, &mut e, None)?;
    d.sort_by(|x, y| y.total_cmp(x));
    Ok(d)
}

/// Unsorted eigenvalues with eigenvector `k` stored as row `k`.
pub(crate) fn householder_ql_rows(a: &Matrix) -> Result<(Vec<f64>, Matrix)> {
    let mut work = symmetrized(a)?;
    let (mut d, mut e, qt) = tridiagonalize(&mut work, true);
    let mut zt = qt.expect("transform requested");
    implicit_ql(&mut d, &mut e, Some(&mut zt))?;
    Ok((d, zt))
}

/// Reduces `a` (destroyed) to tridiagonal form `T = Qᵀ A Q`.
///
/// Returns the diagonal, the superdiagonal padded with a trailing zero, and,
/// if asked, `Qᵀ`.
fn tridiagonalize(a: &mut Matrix, want_q: bool) -> (Vec<f64>, Vec<f64>, Option<Matrix>) {
    let n = a.nrows();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    let mut reflectors: Vec<(usize, f64, Vec<f64>)> = Vec::new();

    let mut p = vec![0.0; n];
    for k in 0..n.saturating_sub(2) {
        d[k] = a[(k, k)];
        let x = &a.row(k)[k + 1..];
        let xnorm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if xnorm == 0.0 {
            e[k] = 0.0;
            continue;
        }
        let alpha = if x[0] >= 0.0 { -xnorm } else { xnorm };
        let mut v = x.to_vec();
        v[0] -= alpha;
        let vtv: f64 = v.iter().map(|t| t * t).sum();
        if vtv == 0.0 {
            e[k] = x[0];
            continue;
        }
        let beta = 2.0 / vtv;
        e[k] = alpha;

        // trailing block S = a[k+1.., k+1..]; S ← H S H with H = I − β v vᵀ
        let m = n - k - 1;
        let p = &mut p[..m];
        for (i, pi) in p.iter_mut().enumerate() {
            let row = &a.row(k + 1 + i)[k + 1..];
            *pi = beta * row.iter().zip(&v).map(|(s, v)| s * v).sum::<f64>();
        }
        let kfac = 0.5 * beta * p.iter().zip(&v).map(|(p, v)| p * v).sum::<f64>();
        for (pi, vi) in p.iter_mut().zip(&v) {
            *pi -= kfac * vi;
        }
        for i in 0..m {
            let (vi, wi) = (v[i], p[i]);
            let row = &mut a.row_mut(k + 1 + i)[k + 1..];
            for ((s, &vj), &wj) in row.iter_mut().zip(&v).zip(p.iter()) {
                *s -= vi * wj + wi * vj;
            }
        }
        if want_q {
            reflectors.push((k + 1, beta, v));
        }
    }
    if n >= 2 {
        d[n - 2] = a[(n - 2, n - 2)];
        e[n - 2] = a[(n - 2, n - 1)];
    }
    if n >= 1 {
        d[n - 1] = a[(n - 1, n - 1)];
    }

    let qt = want_q.then(|| {
        // Qᵀ = H_last ⋯ H_0, accumulated backwards as I·H_last⋯H_0. When H_k is
        // applied only rows and columns past k differ from the identity.
        let mut qt = Matrix::identity(n);
        for (start, beta, v) in reflectors.iter().rev() {
            let start = *start;
            for r in start..n {
                let row = &mut qt.row_mut(r)[start..];
                let s: f64 = row.iter().zip(v).map(|(x, v)| x * v).sum();
                let f = beta * s;
                for (x, &vj) in row.iter_mut().zip(v) {
                    *x -= f * vj;
                }
            }
        }
        qt
    });
    (d, e, qt)
}

/// Implicit QL with Wilkinson-type shifts on a symmetric tridiagonal matrix
/// with diagonal `d` and superdiagonal `e[..n-1]`. On return `d` holds the
/// eigenvalues; rotations are applied to the rows of `zt` when given.
fn implicit_ql(d: &mut [f64], e: &mut [f64], mut zt: Option<&mut Matrix>) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    e[n - 1] = 0.0;
    let eps = f64::EPSILON;
    let mut f = 0.0;
    let mut tst1 = 0.0f64;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > MAX_QL_ITERATIONS {
                    return Err(KlError::NumericFailure(format!(
                        "QL iteration did not converge for eigenvalue {l}"
                    )));
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
                let h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let (mut c, mut c2, mut c3) = (1.0, 1.0, 1.0);
                let el1 = e[l + 1];
                let (mut s, mut s2) = (0.0, 0.0);
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    let h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if let Some(z) = zt.as_deref_mut() {
                        // columns i, i+1 of Z are rows i, i+1 of Zᵀ
                        rotate_rows(z.as_mut_slice(), n, i, i + 1, c, s);
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
    use crate::spectral::jacobi::jacobi_eigen_symmetric;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_symmetric(n: usize, seed: u64) -> Matrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a = Matrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v: f64 = rng.gen_range(-1.0..1.0);
                a[(i, j)] = v;
                a[(j, i)] = v;
            }
        }
        a
    }

    #[test]
    fn agrees_with_jacobi() {
        for (n, seed) in [(1usize, 9u64), (2, 1), (3, 2), (10, 3), (64, 4), (150, 5)] {
            let a = random_symmetric(n, seed);
            let hq = householder_ql_eigen(&a).unwrap();
            let jc = jacobi_eigen_symmetric(&a).unwrap();
            let vals = householder_ql_eigenvalues(&a).unwrap();
            for k in 0..n {
                assert!((hq.values[k] - jc.values[k]).abs() < 1e-11, "n={n} k={k}");
                assert!((vals[k] - jc.values[k]).abs() < 1e-11);
                // simple spectrum: eigenvectors agree up to sign
                let (u, v) = (hq.vector(k), jc.vector(k));
                let dot: f64 = u.iter().zip(&v).map(|(a, b)| a * b).sum();
                assert!((dot.abs() - 1.0).abs() < 1e-9, "n={n} k={k} dot={dot}");
            }
        }
    }

    #[test]
    fn orthonormal_and_accurate() {
        let n = 120;
        let a = random_symmetric(n, 11);
        let eig = householder_ql_eigen(&a).unwrap();
        let vtv = eig.vectors.transpose().matmul(&eig.vectors);
        let back = eig.reconstruct();
        for i in 0..n {
            for j in 0..n {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((vtv[(i, j)] - want).abs() < 1e-12);
                assert!((back[(i, j)] - a[(i, j)]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn handles_already_tridiagonal_and_diagonal() {
        let a = Matrix::from_rows(&[&[3.0, 0.0, 0.0], &[0.0, -1.0, 0.0], &[0.0, 0.0, 2.0]]);
        assert_eq!(
            householder_ql_eigenvalues(&a).unwrap(),
            vec![3.0, 2.0, -1.0]
        );
        // 1D Laplacian: eigenvalues 2 − 2cos(kπ/(n+1))
        let n = 30;
        let mut a = Matrix::zeros(n, n);
        for i in 0..n {
            a[(i, i)] = 2.0;
            if i + 1 < n {
                a[(i, i + 1)] = -1.0;
                a[(i + 1, i)] = -1.0;
            }
        }
        let vals = householder_ql_eigenvalues(&a).unwrap();
        for (k, v) in vals.iter().enumerate() {
            let j = (n - k) as f64;
            let exact = 2.0 - 2.0 * (j * std::f64::consts::PI / (n as f64 + 1.0)).cos();
            assert!((v - exact).abs() < 1e-13);
        }
    }
}
