//! Nyström discretization of the autocorrelation integral operator.

use crate::error::{KlError, Result};
use crate::kernels::{kernel_matrix, Kernel};
use crate::linalg::Matrix;
use crate::quadrature::Grid;

use super::householder::{householder_ql_eigenvalues, householder_ql_rows};
use super::jacobi::jacobi_rows;
use super::{apply_sign_convention, Method, Spectrum};

/// Largest matrix handed to Jacobi under [`EigenSolver::Auto`].
pub const AUTO_JACOBI_MAX_N: usize = 250;

/// Symmetric eigensolver backing a Nyström spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EigenSolver {
    /// Cyclic Jacobi rotations.
    Jacobi,
    /// Householder tridiagonalization and implicit QL.
    HouseholderQl,
    /// Jacobi up to [`AUTO_JACOBI_MAX_N`] nodes, Householder–QL beyond.
    #[default]
    Auto,
}

impl EigenSolver {
    fn resolve(self, n: usize) -> EigenSolver {
        match self {
            EigenSolver::Auto if n <= AUTO_JACOBI_MAX_N => EigenSolver::Jacobi,
            EigenSolver::Auto => EigenSolver::HouseholderQl,
            other => other,
        }
    }
}

/// `B = W^{1/2} A W^{1/2}`, the symmetric form of the weighted kernel matrix.
pub fn weighted_kernel_matrix(kernel: &Kernel, grid: &Grid) -> Matrix {
    let mut b = kernel_matrix(kernel, grid);
    let sw: Vec<f64> = grid.weights().iter().map(|w| w.sqrt()).collect();
    let n = grid.len();
    for i in 0..n {
        let si = sw[i];
        for (x, &sj) in b.row_mut(i).iter_mut().zip(&sw) {
            *x *= si * sj;
        }
    }
    b
}

/// Leading `n_modes` eigenpairs of the integral operator by Nyström
/// discretization on `grid`, with the default solver choice.
pub fn nystrom_spectrum(kernel: &Kernel, grid: &Grid, n_modes: usize) -> Result<Spectrum> {
    nystrom_spectrum_with(kernel, grid, n_modes, EigenSolver::Auto)
}

/// As [`nystrom_spectrum`] with an explicit eigensolver.
///
/// Eigenvalues of `B` are the operator eigenvalues; node values of the
/// eigenfunctions are `vᵢⱼ / √wⱼ`, which makes them orthonormal in the
/// grid inner product.
pub fn nystrom_spectrum_with(
    kernel: &Kernel,
    grid: &Grid,
    n_modes: usize,
    solver: EigenSolver,
) -> Result<Spectrum> {
    let n = grid.len();
    check_modes(n_modes, n)?;
    check_domains(kernel, grid)?;
    let b = weighted_kernel_matrix(kernel, grid);
    let (values, rows) = match solver.resolve(n) {
        EigenSolver::Jacobi => jacobi_rows(&b)?,
        _ => householder_ql_rows(&b)?,
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[j].total_cmp(&values[i]));

    let inv_sw: Vec<f64> = grid.weights().iter().map(|w| 1.0 / w.sqrt()).collect();
    let mut eigenvalues = Vec::with_capacity(n_modes);
    let mut modes = Vec::with_capacity(n_modes);
    for &k in order.iter().take(n_modes) {
        eigenvalues.push(values[k]);
        let mut e: Vec<f64> = rows
            .row(k)
            .iter()
            .zip(&inv_sw)
            .map(|(v, s)| v * s)
            .collect();
        apply_sign_convention(&mut e);
        modes.push(e);
    }
    Ok(Spectrum::from_parts(
        *kernel,
        grid.clone(),
        Method::Nystrom,
        eigenvalues,
        modes,
        None,
    ))
}

/// All Nyström eigenvalues in descending order, without eigenfunctions.
pub fn nystrom_eigenvalues(kernel: &Kernel, grid: &Grid) -> Result<Vec<f64>> {
    check_domains(kernel, grid)?;
    householder_ql_eigenvalues(&weighted_kernel_matrix(kernel, grid))
}

/// Nyström extension of eigenfunction `mode` to an arbitrary `t`:
/// `eᵢ(t) = (1/λᵢ) Σⱼ wⱼ k(t, tⱼ) eᵢ(tⱼ)`.
///
/// Fails for modes whose eigenvalue is numerically zero and for `t` outside
/// the domain.
pub fn nystrom_interpolate(spectrum: &Spectrum, mode: usize, t: f64) -> Result<f64> {
    spectrum.check_usable(mode)?;
    let domain = spectrum.grid().domain();
    if !domain.contains(t) {
        return Err(KlError::InvalidParameter(format!(
            "t = {t} lies outside [{}, {}]",
            domain.a(),
            domain.b()
        )));
    }
    let kernel = spectrum.kernel();
    let grid = spectrum.grid();
    let e = spectrum.eigenfunction_values(mode);
    let sum: f64 = grid
        .nodes()
        .iter()
        .zip(grid.weights())
        .zip(e)
        .map(|((&tj, &wj), &ej)| wj * kernel.eval(t, tj) * ej)
        .sum();
    Ok(sum / spectrum.eigenvalues()[mode])
}

fn check_modes(n_modes: usize, n: usize) -> Result<()> {
    if n_modes == 0 || n_modes > n {
        return Err(KlError::InvalidParameter(format!(
            "n_modes must lie in 1..={n}, got {n_modes}"
        )));
    }
    Ok(())
}

pub(crate) fn check_domains(kernel: &Kernel, grid: &Grid) -> Result<()> {
    if kernel.domain() != grid.domain() {
        return Err(KlError::InvalidParameter(
            "kernel and grid are defined on different domains".into(),
        ));
    }
    Ok(())
}
