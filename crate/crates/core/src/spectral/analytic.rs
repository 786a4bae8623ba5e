//! Closed-form eigenpairs of the exponential kernel.
//!
//! On the centred interval `[−T, T]` with `c = 1/L`, the eigenfunctions of
//! `σ² exp(−c|s − t|)` are `cos(ωx)` for the roots of `c − ω tan(ωT) = 0`
//! and `sin(ωx)` for the roots of `ω + c tan(ωT) = 0`, each with eigenvalue
//! `2cσ² / (ω² + c²)`. Roots are bracketed one per tangent branch and refined
//! by bisection.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{KlError, Result};
use crate::kernels::{Kernel, KernelKind};
use crate::quadrature::Grid;

use super::nystrom::check_domains;
use super::{apply_sign_convention, Method, Spectrum};

/// Relative bisection tolerance on ω.
pub const ROOT_TOLERANCE: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    /// `cos(ω(t − m))`
    Even,
    /// `sin(ω(t − m))`
    Odd,
}

/// One analytic eigenfunction: `scale · trig(ω (t − midpoint))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticMode {
    pub omega: f64,
    pub parity: Parity,
    /// Normalization to unit discrete norm, sign included.
    pub scale: f64,
}

impl AnalyticMode {
    pub fn eval(&self, midpoint: f64, t: f64) -> f64 {
        let x = self.omega * (t - midpoint);
        self.scale
            * match self.parity {
                Parity::Even => x.cos(),
                Parity::Odd => x.sin(),
            }
    }
}

/// The `k`-th characteristic root (0-based) in increasing order, with its
/// parity. Even and odd roots interleave: mode `k` is even when `k` is even.
///
/// With `θ = ωT` and `κ = cT`, even root `j` solves `θ = jπ + atan(κ/θ)` on
/// `[jπ, jπ + π/2]` and odd root `j` solves `θ = (j + 1)π − atan(θ/κ)` on
/// `[jπ + π/2, (j + 1)π]`. Both phase functions are increasing and change sign
/// across their branch, so bisection cannot lose the root even when it sits
/// next to a branch end (very short or very long correlation lengths).
pub fn characteristic_root(c: f64, half_width: f64, k: usize) -> Result<(f64, Parity)> {
    let kappa = c * half_width;
    if !(kappa.is_finite() && kappa > 0.0) {
        return Err(KlError::NumericFailure(format!(
            "c·T = {kappa:e} leaves no representable characteristic roots"
        )));
    }
    let j = (k / 2) as f64;
    let (parity, lo, hi) = if k.is_multiple_of(2) {
        (Parity::Even, j * PI, j * PI + FRAC_PI_2)
    } else {
        (Parity::Odd, j * PI + FRAC_PI_2, (j + 1.0) * PI)
    };
    let g = |th: f64| match parity {
        Parity::Even => th - j * PI - (kappa / th).atan(),
        Parity::Odd => th - (j + 1.0) * PI + (th / kappa).atan(),
    };
    let theta = bisect(g, lo, hi);
    let omega = theta / half_width;
    if !(omega.is_finite() && omega > 0.0) {
        return Err(KlError::NumericFailure(format!(
            "characteristic root {k} underflowed (c = {c:e})"
        )));
    }
    Ok((omega, parity))
}

/// Bisection of an increasing `g` with `g(lo) ≤ 0 ≤ g(hi)`.
fn bisect(g: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    let (mut a, mut b) = (lo, hi);
    while b - a > ROOT_TOLERANCE * b {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let gm = g(mid);
        if gm == 0.0 {
            return mid;
        }
        if gm < 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}

/// `2cσ² / (ω² + c²)`, arranged so that neither `c²` nor `ω²` can overflow.
fn eigenvalue(c: f64, omega: f64, sigma2: f64) -> f64 {
    2.0 * sigma2 / (c + omega * (omega / c))
}

/// First `n_modes` analytic eigenpairs of an exponential kernel, eigenfunctions
/// sampled on `grid` and normalized to unit discrete norm.
pub fn analytic_spectrum_exponential(
    kernel: &Kernel,
    grid: &Grid,
    n_modes: usize,
) -> Result<Spectrum> {
    if kernel.kind() != KernelKind::Exponential {
        return Err(KlError::InvalidParameter(format!(
            "closed-form eigenpairs exist only for the exponential kernel, got {:?}",
            kernel.kind()
        )));
    }
    if n_modes == 0 {
        return Err(KlError::InvalidParameter("n_modes must be positive".into()));
    }
    check_domains(kernel, grid)?;
    let domain = grid.domain();
    let c = 1.0 / kernel.corr_len();
    let half = 0.5 * domain.length();
    let mid = domain.midpoint();

    let mut eigenvalues = Vec::with_capacity(n_modes);
    let mut modes = Vec::with_capacity(n_modes);
    let mut params = Vec::with_capacity(n_modes);
    for k in 0..n_modes {
        let (omega, parity) = characteristic_root(c, half, k)?;
        let raw = AnalyticMode {
            omega,
            parity,
            scale: 1.0,
        };
        let mut values: Vec<f64> = grid.nodes().iter().map(|&t| raw.eval(mid, t)).collect();
        let norm = grid.norm(&values)?;
        if norm == 0.0 {
            return Err(KlError::NumericFailure(format!(
                "analytic mode {k} vanishes on every grid node"
            )));
        }
        values.iter_mut().for_each(|v| *v /= norm);
        let flipped = apply_sign_convention(&mut values);
        let scale = if flipped { -1.0 / norm } else { 1.0 / norm };
        // keep stored node values identical to what the closed form returns
        let mode = AnalyticMode { scale, ..raw };
        let values = grid.nodes().iter().map(|&t| mode.eval(mid, t)).collect();

        let lambda = eigenvalue(c, omega, kernel.sigma2());
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(KlError::NumericFailure(format!(
                "eigenvalue of analytic mode {k} is not representable ({lambda:e})"
            )));
        }
        eigenvalues.push(lambda);
        modes.push(values);
        params.push(mode);
    }
    Ok(Spectrum::from_parts(
        *kernel,
        grid.clone(),
        Method::Analytic,
        eigenvalues,
        modes,
        Some(params),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_root_for_unit_parameters() {
        // ω tan(ω/2) = 1
        let (w, p) = characteristic_root(1.0, 0.5, 0).unwrap();
        assert_eq!(p, Parity::Even);
        assert!((w * (0.5 * w).tan() - 1.0).abs() < 1e-12);
        assert!((2.0 / (w * w + 1.0) - 0.738_810_8).abs() < 1e-7);
    }

    #[test]
    fn one_root_per_branch_and_increasing() {
        let (c, half) = (1.0, 0.5);
        let mut prev = 0.0;
        for k in 0..200 {
            let (w, parity) = characteristic_root(c, half, k).unwrap();
            let j = (k / 2) as f64;
            let th = w * half;
            match parity {
                Parity::Even => {
                    assert!(th > j * PI && th < j * PI + FRAC_PI_2);
                    assert!((c - w * th.tan()).abs() < 1e-8 * w.max(1.0) * th.tan().abs().max(1.0));
                }
                Parity::Odd => {
                    assert!(th > j * PI + FRAC_PI_2 && th < (j + 1.0) * PI);
                    assert!((w + c * th.tan()).abs() < 1e-8 * w.max(1.0));
                }
            }
            assert!(w > prev);
            prev = w;
        }
    }

    #[test]
    fn short_correlation_length() {
        // large c pushes even roots towards the right end of their branch
        for c in [1e3, 1e8, 1e20, 1e200] {
            for k in 0..10 {
                let (w, _) = characteristic_root(c, 0.5, k).unwrap();
                let th = 0.5 * w;
                let end = (k + 1) as f64 * FRAC_PI_2;
                assert!(th <= end && end - th <= 2.0 * end / (0.5 * c) + 1e-13 * end);
                assert!(eigenvalue(c, w, 1.0) > 0.0);
            }
        }
    }

    #[test]
    fn long_correlation_length() {
        // c → 0: first root ≈ √(c/T), the rest approach multiples of π/2T
        for c in [1e-6, 1e-60, 1e-300] {
            let (w, _) = characteristic_root(c, 0.5, 0).unwrap();
            assert!((w / (2.0 * c).sqrt() - 1.0).abs() < 1e-5, "c = {c}: {w}");
            // nearly all variance in the first mode: λ₁ → σ²(b − a)
            assert!((eigenvalue(c, w, 1.0) - 1.0).abs() < 1e-5);
            let (w1, _) = characteristic_root(c, 0.5, 1).unwrap();
            assert!((0.5 * w1 - FRAC_PI_2).abs() < 1e-5);
        }
    }

    #[test]
    fn unrepresentable_parameters_fail_numerically() {
        assert!(matches!(
            characteristic_root(f64::INFINITY, 0.5, 0),
            Err(KlError::NumericFailure(_))
        ));
    }
}
