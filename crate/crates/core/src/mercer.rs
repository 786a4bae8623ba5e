//! Truncated Mercer reconstructions `R_N(s, t) = Σ_{i≤N} λᵢ eᵢ(s) eᵢ(t)` and
//! how fast they approach the kernel.

use serde::Serialize;

use crate::error::{KlError, Result};
use crate::kernels::Kernel;
use crate::linalg::Matrix;
use crate::quadrature::{Grid, Rule};
use crate::spectral::Spectrum;

/// Default side of the square evaluation lattice.
pub const DEFAULT_EVAL_N: usize = 101;

/// `R_N(s, t)`, eigenfunctions evaluated through
/// [`Spectrum::evaluate_modes`].
pub fn mercer_truncation(spectrum: &Spectrum, n: usize, s: f64, t: f64) -> Result<f64> {
    check_truncation(spectrum, n)?;
    let e = spectrum.evaluate_modes(&[s, t], n)?;
    let lams = spectrum.eigenvalues();
    Ok((0..n).map(|i| lams[i] * (e[(0, i)] * e[(1, i)])).sum())
}

fn check_truncation(spectrum: &Spectrum, n: usize) -> Result<()> {
    if n == 0 || n > spectrum.n_modes() {
        return Err(KlError::InvalidParameter(format!(
            "truncation order must lie in 1..={}, got {n}",
            spectrum.n_modes()
        )));
    }
    Ok(())
}

/// Errors of one truncation order over the lattice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub n: usize,
    pub max_abs_error: f64,
    pub l2_error: f64,
}

/// Convergence of `R_N` to `R` on a uniform `eval_n × eval_n` lattice.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReconstructionReport {
    pub truncation: usize,
    #[serde(skip)]
    pub eval_grid: Grid,
    pub eval_n: usize,
    /// Sup norm of `R − R_N` at `N = truncation`.
    pub max_abs_error: f64,
    /// Discrete `L²(D×D)` norm of `R − R_N` at `N = truncation`, with
    /// trapezoid weights on the lattice.
    pub l2_error: f64,
    /// One entry for each `N = 1..=truncation`.
    pub per_n_curve: Vec<CurvePoint>,
}

/// Incrementally assembled reconstruction on a lattice.
struct Lattice {
    grid: Grid,
    kernel_values: Matrix,
    /// Row `i` holds mode `i` at the lattice points.
    modes: Matrix,
}

impl Lattice {
    fn new(spectrum: &Spectrum, kernel: &Kernel, count: usize, eval_n: usize) -> Result<Self> {
        if eval_n < 2 {
            return Err(KlError::InvalidParameter(format!(
                "evaluation lattice needs at least 2 points, got {eval_n}"
            )));
        }
        let grid = Grid::new(spectrum.grid().domain(), eval_n, Rule::Trapezoid)?;
        let modes = spectrum.evaluate_modes(grid.nodes(), count)?.transpose();
        let pts = grid.nodes();
        let mut kernel_values = Matrix::zeros(eval_n, eval_n);
        for p in 0..eval_n {
            for q in p..eval_n {
                let v = kernel.eval(pts[p], pts[q]);
                kernel_values[(p, q)] = v;
                kernel_values[(q, p)] = v;
            }
        }
        Ok(Self {
            grid,
            kernel_values,
            modes,
        })
    }

    /// Adds mode `i` to the upper triangle of `acc`.
    fn add_mode(&self, acc: &mut Matrix, i: usize, lambda: f64) {
        let m = self.grid.len();
        let e = self.modes.row(i);
        for p in 0..m {
            let ep = e[p];
            for (a, &eq) in acc.row_mut(p)[p..].iter_mut().zip(&e[p..]) {
                *a += lambda * (ep * eq);
            }
        }
    }

    fn errors(&self, acc: &Matrix) -> (f64, f64) {
        let m = self.grid.len();
        let w = self.grid.weights();
        let mut max = 0.0f64;
        let mut l2 = 0.0;
        for p in 0..m {
            for q in p..m {
                let d = self.kernel_values[(p, q)] - acc[(p, q)];
                max = max.max(d.abs());
                let mult = if p == q { 1.0 } else { 2.0 };
                l2 += mult * w[p] * w[q] * d * d;
            }
        }
        (max, l2.sqrt())
    }
}

/// Errors of `R_N` against `kernel` for every `N = 1..=n_max`.
pub fn reconstruction_report(
    spectrum: &Spectrum,
    kernel: &Kernel,
    n_max: usize,
    eval_n: usize,
) -> Result<ReconstructionReport> {
    check_truncation(spectrum, n_max)?;
    let lattice = Lattice::new(spectrum, kernel, n_max, eval_n)?;
    let mut acc = Matrix::zeros(eval_n, eval_n);
    let mut curve = Vec::with_capacity(n_max);
    for (i, &lam) in spectrum.eigenvalues()[..n_max].iter().enumerate() {
        lattice.add_mode(&mut acc, i, lam);
        let (max_abs_error, l2_error) = lattice.errors(&acc);
        curve.push(CurvePoint {
            n: i + 1,
            max_abs_error,
            l2_error,
        });
    }
    let last = *curve.last().expect("n_max >= 1");
    Ok(ReconstructionReport {
        truncation: n_max,
        eval_grid: lattice.grid,
        eval_n,
        max_abs_error: last.max_abs_error,
        l2_error: last.l2_error,
        per_n_curve: curve,
    })
}

/// One lattice point of an error surface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SurfacePoint {
    pub s: f64,
    pub t: f64,
    pub r_x: f64,
    pub r_x_n: f64,
    pub difference: f64,
}

/// `R`, `R_N` and `R − R_N` over the full lattice, `s` varying slowest.
pub fn error_surface(
    spectrum: &Spectrum,
    kernel: &Kernel,
    n: usize,
    eval_n: usize,
) -> Result<Vec<SurfacePoint>> {
    check_truncation(spectrum, n)?;
    let lattice = Lattice::new(spectrum, kernel, n, eval_n)?;
    let mut acc = Matrix::zeros(eval_n, eval_n);
    for (i, &lam) in spectrum.eigenvalues()[..n].iter().enumerate() {
        lattice.add_mode(&mut acc, i, lam);
    }
    let pts = lattice.grid.nodes();
    let mut out = Vec::with_capacity(eval_n * eval_n);
    for p in 0..eval_n {
        for q in 0..eval_n {
            let (i, j) = if p <= q { (p, q) } else { (q, p) };
            let r_x = lattice.kernel_values[(i, j)];
            let r_x_n = acc[(i, j)];
            out.push(SurfacePoint {
                s: pts[p],
                t: pts[q],
                r_x,
                r_x_n,
                difference: r_x - r_x_n,
            });
        }
    }
    Ok(out)
}

/// `k(t, t) − Σ_{i≤N} λᵢ eᵢ(t)²` at each point.
pub fn diagonal_tail(spectrum: &Spectrum, n: usize, points: &[f64]) -> Result<Vec<f64>> {
    check_truncation(spectrum, n)?;
    let e = spectrum.evaluate_modes(points, n)?;
    let lams = spectrum.eigenvalues();
    Ok(points
        .iter()
        .enumerate()
        .map(|(p, &t)| {
            let partial: f64 = (0..n).map(|i| lams[i] * (e[(p, i)] * e[(p, i)])).sum();
            spectrum.kernel().eval(t, t) - partial
        })
        .collect())
}
