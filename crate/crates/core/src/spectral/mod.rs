//! Eigenpairs `K eᵢ = λᵢ eᵢ` of the autocorrelation integral operator.
//!
//! Two independent routes produce a [`Spectrum`]: Nyström discretization
//! ([`nystrom_spectrum`]) for any kernel, and the closed form for the
//! exponential kernel ([`analytic_spectrum_exponential`]).

mod analytic;
mod householder;
mod jacobi;
mod nystrom;

use serde::{Deserialize, Serialize};

use crate::error::{check_len, KlError, Result};
use crate::kernels::Kernel;
use crate::linalg::Matrix;
use crate::quadrature::{weighted_dot, Grid};

pub use analytic::{
    analytic_spectrum_exponential, characteristic_root, AnalyticMode, Parity, ROOT_TOLERANCE,
};
pub use householder::{householder_ql_eigen, householder_ql_eigenvalues};
pub use jacobi::{jacobi_eigen_symmetric, SymmetricEigen, JACOBI_MAX_SWEEPS, JACOBI_TOLERANCE};
pub use nystrom::{
    nystrom_eigenvalues, nystrom_interpolate, nystrom_spectrum, nystrom_spectrum_with,
    weighted_kernel_matrix, EigenSolver, AUTO_JACOBI_MAX_N,
};

/// A mode is unusable for KL purposes once `λᵢ ≤ ZERO_MODE_CUTOFF · λ₁`.
pub const ZERO_MODE_CUTOFF: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    #[default]
    Nystrom,
    Analytic,
}

/// Ordered eigenpairs of the integral operator with eigenfunction values at
/// the grid nodes.
///
/// Eigenvalues are descending. Each eigenfunction carries a fixed sign: its
/// first nonzero node value is positive.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    kernel: Kernel,
    grid: Grid,
    method: Method,
    eigenvalues: Vec<f64>,
    modes: Vec<Vec<f64>>,
    analytic: Option<Vec<AnalyticMode>>,
}

impl Spectrum {
    pub(crate) fn from_parts(
        kernel: Kernel,
        grid: Grid,
        method: Method,
        eigenvalues: Vec<f64>,
        modes: Vec<Vec<f64>>,
        analytic: Option<Vec<AnalyticMode>>,
    ) -> Self {
        debug_assert_eq!(eigenvalues.len(), modes.len());
        Self {
            kernel,
            grid,
            method,
            eigenvalues,
            modes,
            analytic,
        }
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn n_modes(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Values of eigenfunction `i` at the grid nodes.
    pub fn eigenfunction_values(&self, i: usize) -> &[f64] {
        &self.modes[i]
    }

    /// Closed-form parameters, present for analytic spectra.
    pub fn analytic_modes(&self) -> Option<&[AnalyticMode]> {
        self.analytic.as_deref()
    }

    /// Number of leading modes with `λᵢ > ZERO_MODE_CUTOFF · λ₁`.
    pub fn usable_modes(&self) -> usize {
        let Some(&first) = self.eigenvalues.first() else {
            return 0;
        };
        if first <= 0.0 {
            return 0;
        }
        self.eigenvalues
            .iter()
            .take_while(|&&l| l > ZERO_MODE_CUTOFF * first)
            .count()
    }

    pub(crate) fn check_usable(&self, mode: usize) -> Result<()> {
        if mode >= self.n_modes() {
            return Err(KlError::InvalidParameter(format!(
                "mode {mode} out of range; spectrum holds {} modes",
                self.n_modes()
            )));
        }
        let lam = self.eigenvalues[mode];
        if !(lam > ZERO_MODE_CUTOFF * self.eigenvalues[0]) {
            return Err(KlError::ZeroMode {
                mode,
                eigenvalue: lam,
            });
        }
        Ok(())
    }

    /// Evaluator for eigenfunction `mode` anywhere in the domain.
    pub fn eigenfunction(&self, mode: usize) -> Result<EigenfunctionEvaluator<'_>> {
        if mode >= self.n_modes() {
            return Err(KlError::InvalidParameter(format!(
                "mode {mode} out of range; spectrum holds {} modes",
                self.n_modes()
            )));
        }
        Ok(EigenfunctionEvaluator {
            spectrum: self,
            mode,
        })
    }

    /// Row `p` holds `e₀(tₚ), …, e_{count−1}(tₚ)` for each point `tₚ`.
    ///
    /// Grid nodes return stored values; other points go through the closed
    /// form or the Nyström extension. Each off-grid point costs one kernel row.
    pub fn evaluate_modes(&self, points: &[f64], count: usize) -> Result<Matrix> {
        if count > self.n_modes() {
            return Err(KlError::InvalidParameter(format!(
                "requested {count} modes; spectrum holds {}",
                self.n_modes()
            )));
        }
        let domain = self.grid.domain();
        if let Some(&t) = points.iter().find(|&&t| !domain.contains(t)) {
            return Err(KlError::InvalidParameter(format!(
                "t = {t} lies outside [{}, {}]",
                domain.a(),
                domain.b()
            )));
        }
        let mut out = Matrix::zeros(points.len(), count);
        let mut kw = vec![0.0; self.grid.len()];
        let mid = domain.midpoint();
        for (p, &t) in points.iter().enumerate() {
            if let Some(j) = self.grid.node_index(t) {
                for i in 0..count {
                    out[(p, i)] = self.modes[i][j];
                }
                continue;
            }
            if let Some(params) = &self.analytic {
                for i in 0..count {
                    out[(p, i)] = params[i].eval(mid, t);
                }
                continue;
            }
            if count > 0 {
                self.check_usable(count - 1)?;
            }
            for ((k, &tj), &wj) in kw
                .iter_mut()
                .zip(self.grid.nodes())
                .zip(self.grid.weights())
            {
                *k = wj * self.kernel.eval(t, tj);
            }
            for i in 0..count {
                let s: f64 = kw.iter().zip(&self.modes[i]).map(|(a, b)| a * b).sum();
                out[(p, i)] = s / self.eigenvalues[i];
            }
        }
        Ok(out)
    }

    /// `max_{i,j} |⟨eᵢ, eⱼ⟩ − δᵢⱼ|` over the first `count` modes.
    pub fn orthonormality_defect(&self, count: usize) -> f64 {
        let w = self.grid.weights();
        let mut worst = 0.0f64;
        for i in 0..count.min(self.n_modes()) {
            for j in i..count.min(self.n_modes()) {
                let ip = weighted_dot(w, &self.modes[i], &self.modes[j]);
                let want = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((ip - want).abs());
            }
        }
        worst
    }

    /// `‖K_h eᵢ − λᵢ eᵢ‖` in the grid norm, with `K_h` the discretized operator
    /// `(K_h u)(tₖ) = Σⱼ wⱼ k(tₖ, tⱼ) u(tⱼ)`.
    pub fn residual_norm(&self, mode: usize) -> f64 {
        let nodes = self.grid.nodes();
        let w = self.grid.weights();
        let e = &self.modes[mode];
        let lam = self.eigenvalues[mode];
        let r: Vec<f64> = nodes
            .iter()
            .zip(e)
            .map(|(&tk, &ek)| {
                let ke: f64 = nodes
                    .iter()
                    .zip(w)
                    .zip(e)
                    .map(|((&tj, &wj), &ej)| wj * self.kernel.eval(tk, tj) * ej)
                    .sum();
                ke - lam * ek
            })
            .collect();
        weighted_dot(w, &r, &r).sqrt()
    }
}

/// Evaluates one eigenfunction anywhere in the domain.
#[derive(Debug, Clone, Copy)]
pub struct EigenfunctionEvaluator<'a> {
    spectrum: &'a Spectrum,
    mode: usize,
}

impl EigenfunctionEvaluator<'_> {
    pub fn mode(&self) -> usize {
        self.mode
    }

    /// Stored value at grid nodes, closed form for analytic spectra, Nyström
    /// extension otherwise.
    pub fn eval(&self, t: f64) -> Result<f64> {
        let s = self.spectrum;
        let domain = s.grid.domain();
        if !domain.contains(t) {
            return Err(KlError::InvalidParameter(format!(
                "t = {t} lies outside [{}, {}]",
                domain.a(),
                domain.b()
            )));
        }
        if let Some(j) = s.grid.node_index(t) {
            return Ok(s.modes[self.mode][j]);
        }
        match &s.analytic {
            Some(params) => Ok(params[self.mode].eval(domain.midpoint(), t)),
            None => nystrom_interpolate(s, self.mode, t),
        }
    }
}

/// Flips `values` so the first nonzero entry is positive; returns whether it
/// flipped.
pub(crate) fn apply_sign_convention(values: &mut [f64]) -> bool {
    match values.iter().find(|v| **v != 0.0) {
        Some(&v) if v < 0.0 => {
            values.iter_mut().for_each(|x| *x = -*x);
            true
        }
        _ => false,
    }
}

/// Smallest `N` whose leading eigenvalues carry at least `fraction` of the
/// stored total. Negative round-off eigenvalues count as zero.
pub fn mode_count_for_energy(spectrum: &Spectrum, fraction: f64) -> Result<usize> {
    energy_mode_count(spectrum.eigenvalues(), fraction)
}

/// [`mode_count_for_energy`] on a plain descending list of eigenvalues.
pub fn energy_mode_count(eigenvalues: &[f64], fraction: f64) -> Result<usize> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(KlError::InvalidParameter(format!(
            "energy fraction must lie in (0, 1], got {fraction}"
        )));
    }
    let lams: Vec<f64> = eigenvalues.iter().map(|l| l.max(0.0)).collect();
    let total: f64 = lams.iter().sum();
    if lams.is_empty() || total <= 0.0 {
        return Err(KlError::InvalidParameter(
            "spectrum carries no energy".into(),
        ));
    }
    let mut acc = 0.0;
    for (i, l) in lams.iter().enumerate() {
        acc += l;
        if acc >= fraction * total {
            return Ok(i + 1);
        }
    }
    Ok(lams.len())
}

/// Discrete `⟨u, e_mode⟩`.
pub(crate) fn project(spectrum: &Spectrum, values: &[f64], mode: usize) -> Result<f64> {
    check_len(spectrum.grid.len(), values.len())?;
    Ok(weighted_dot(
        spectrum.grid.weights(),
        values,
        &spectrum.modes[mode],
    ))
}
