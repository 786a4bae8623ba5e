//! Cyclic Jacobi eigensolver for dense symmetric matrices.

use crate::error::{KlError, Result};
use crate::linalg::Matrix;

/// Off-diagonal Frobenius mass below which the matrix counts as diagonal,
/// relative to `‖A‖_F`.
pub const JACOBI_TOLERANCE: f64 = 1e-14;

/// Hard cap on full sweeps over the off-diagonal pairs.
pub const JACOBI_MAX_SWEEPS: usize = 100;

/// Eigenvalues in descending order with the matching orthonormal eigenvectors
/// as the columns of `vectors`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

impl SymmetricEigen {
    /// Eigenvector `k` as an owned vector.
    pub fn vector(&self, k: usize) -> Vec<f64> {
        self.vectors.column(k)
    }

    /// Assembles `V diag(λ) Vᵀ`.
    pub fn reconstruct(&self) -> Matrix {
        let n = self.values.len();
        let mut out = Matrix::zeros(n, n);
        for (k, &lam) in self.values.iter().enumerate() {
            let v = self.vector(k);
            for i in 0..n {
                let s = lam * v[i];
                for (o, &vj) in out.row_mut(i).iter_mut().zip(&v) {
                    *o += s * vj;
                }
            }
        }
        out
    }
}

/// Rejects non-square input and input that is not symmetric to 1e-12
/// relative, then returns the symmetrized copy.
pub(crate) fn symmetrized(a: &Matrix) -> Result<Matrix> {
    if !a.is_square() {
        return Err(KlError::InvalidParameter(format!(
            "eigensolver needs a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let scale = a.max_abs();
    if a.as_slice().iter().any(|v| !v.is_finite()) || a.asymmetry() > 1e-12 * scale {
        return Err(KlError::InvalidParameter(
            "eigensolver needs a finite symmetric matrix".into(),
        ));
    }
    let n = a.nrows();
    let mut s = a.clone();
    for i in 0..n {
        for j in i + 1..n {
            let v = 0.5 * (a[(i, j)] + a[(j, i)]);
            s[(i, j)] = v;
            s[(j, i)] = v;
        }
    }
    Ok(s)
}

/// Sorts eigenpairs given as (values, rows-are-vectors) into descending order
/// and returns them with the vectors as columns.
pub(crate) fn sorted_descending(values: Vec<f64>, rows: Matrix) -> SymmetricEigen {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[j].total_cmp(&values[i]));
    let mut vectors = Matrix::zeros(n, n);
    for (col, &k) in order.iter().enumerate() {
        for (i, &v) in rows.row(k).iter().enumerate() {
            vectors[(i, col)] = v;
        }
    }
    SymmetricEigen {
        values: order.iter().map(|&k| values[k]).collect(),
        vectors,
    }
}

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Sweeps every off-diagonal pair in row order until the off-diagonal
/// Frobenius norm drops to [`JACOBI_TOLERANCE`]`·‖A‖_F`, giving up after
/// [`JACOBI_MAX_SWEEPS`] sweeps.
pub fn jacobi_eigen_symmetric(a: &Matrix) -> Result<SymmetricEigen> {
    let (values, rows) = jacobi_rows(a)?;
    Ok(sorted_descending(values, rows))
}

/// Unsorted eigenvalues and a matrix whose row `k` is eigenvector `k`.
pub(crate) fn jacobi_rows(a: &Matrix) -> Result<(Vec<f64>, Matrix)> {
    let mut a = symmetrized(a)?;
    let n = a.nrows();
    // rows of vt are the columns of the accumulated rotation V
    let mut vt = Matrix::identity(n);
    let norm = a.frobenius_norm();
    let target = JACOBI_TOLERANCE * norm;

    let mut converged = false;
    for _ in 0..=JACOBI_MAX_SWEEPS {
        if off_diagonal_norm(&a) <= target {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let (app, aqq) = (a[(p, p)], a[(q, q)]);
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                rotate_rows(a.as_mut_slice(), n, p, q, c, s);
                for k in 0..n {
                    if k != p && k != q {
                        a[(k, p)] = a[(p, k)];
                        a[(k, q)] = a[(q, k)];
                    }
                }
                a[(p, p)] = app - t * apq;
                a[(q, q)] = aqq + t * apq;
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;

                rotate_rows(vt.as_mut_slice(), n, p, q, c, s);
            }
        }
    }
    if !converged {
        return Err(KlError::NumericFailure(format!(
            "Jacobi did not converge within {JACOBI_MAX_SWEEPS} sweeps"
        )));
    }
    let values = (0..n).map(|i| a[(i, i)]).collect();
    Ok((values, vt))
}

fn off_diagonal_norm(a: &Matrix) -> f64 {
    let n = a.nrows();
    let mut sum = 0.0;
    for i in 0..n {
        for (j, v) in a.row(i).iter().enumerate() {
            if i != j {
                sum += v * v;
            }
        }
    }
    sum.sqrt()
}

/// `(row_p, row_q) ← (c·row_p − s·row_q, s·row_p + c·row_q)` for `p < q`.
#[inline]
pub(crate) fn rotate_rows(data: &mut [f64], n: usize, p: usize, q: usize, c: f64, s: f64) {
    debug_assert!(p < q);
    let (head, tail) = data.split_at_mut(q * n);
    let rp = &mut head[p * n..(p + 1) * n];
    let rq = &mut tail[..n];
    for (x, y) in rp.iter_mut().zip(rq.iter_mut()) {
        let (xp, xq) = (*x, *y);
        *x = c * xp - s * xq;
        *y = s * xp + c * xq;
    }
}
