//! Seeded realizations of a truncated KL expansion
//! `X_N(t, ω) = Σ_{i≤N} √λᵢ ξᵢ(ω) eᵢ(t)` with independent standard normal
//! `ξᵢ`, and recovery of the coefficients by projection.

pub mod rng;
mod stats;

use rayon::prelude::*;

use crate::error::{check_len, KlError, Result};
use crate::kernels::Kernel;
use crate::linalg::Matrix;
use crate::spectral::{self, Spectrum};

pub use rng::{standard_normal, standard_normal_stream};
pub use stats::{
    coefficient_statistics, empirical_covariance, marginal_normality, CoefficientStatistics,
    CovarianceReport, KsReport, KS_CRITICAL_VALUE,
};

/// A spectrum truncated to its first `truncation` modes.
#[derive(Debug, Clone, PartialEq)]
pub struct KlModel {
    spectrum: Spectrum,
    truncation: usize,
    sqrt_lambda: Vec<f64>,
}

impl KlModel {
    /// Fails unless `1 ≤ truncation ≤ spectrum.usable_modes()`.
    pub fn new(spectrum: Spectrum, truncation: usize) -> Result<Self> {
        let usable = spectrum.usable_modes();
        if truncation == 0 || truncation > usable {
            return Err(KlError::InvalidParameter(format!(
                "truncation must lie in 1..={usable} (modes above the zero cutoff), got {truncation}"
            )));
        }
        let sqrt_lambda = spectrum.eigenvalues()[..truncation]
            .iter()
            .map(|l| l.sqrt())
            .collect();
        Ok(Self {
            spectrum,
            truncation,
            sqrt_lambda,
        })
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn kernel(&self) -> &Kernel {
        self.spectrum.kernel()
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn grid_len(&self) -> usize {
        self.spectrum.grid().len()
    }

    /// `v_N(t) = Σ_{i≤N} λᵢ eᵢ(t)²`, the variance of the truncated field.
    pub fn variance_at(&self, t: f64) -> Result<f64> {
        let e = self.spectrum.evaluate_modes(&[t], self.truncation)?;
        Ok(self.variance_from_row(e.row(0)))
    }

    fn variance_from_row(&self, e: &[f64]) -> f64 {
        let lams = self.spectrum.eigenvalues();
        e.iter().zip(lams).map(|(v, l)| l * (v * v)).sum()
    }

    /// `v_N` at every grid node.
    pub fn node_variances(&self) -> Vec<f64> {
        (0..self.grid_len())
            .map(|j| {
                let lams = self.spectrum.eigenvalues();
                (0..self.truncation)
                    .map(|i| {
                        let e = self.spectrum.eigenfunction_values(i)[j];
                        lams[i] * (e * e)
                    })
                    .sum()
            })
            .collect()
    }

    /// Field values at the grid nodes for coefficients `xi`.
    pub fn synthesize(&self, xi: &[f64]) -> Result<Vec<f64>> {
        check_len(self.truncation, xi.len())?;
        let mut out = vec![0.0; self.grid_len()];
        self.synthesize_into(xi, &mut out);
        Ok(out)
    }

    fn synthesize_into(&self, xi: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for (i, (&x, &sl)) in xi.iter().zip(&self.sqrt_lambda).enumerate() {
            let a = sl * x;
            for (o, &e) in out.iter_mut().zip(self.spectrum.eigenfunction_values(i)) {
                *o += a * e;
            }
        }
    }

    /// Truncated field at arbitrary points for coefficients `xi`.
    pub fn synthesize_at(&self, xi: &[f64], points: &[f64]) -> Result<Vec<f64>> {
        check_len(self.truncation, xi.len())?;
        let e = self.spectrum.evaluate_modes(points, self.truncation)?;
        Ok((0..points.len())
            .map(|p| {
                e.row(p)
                    .iter()
                    .zip(xi)
                    .zip(&self.sqrt_lambda)
                    .map(|((e, x), s)| s * x * e)
                    .sum()
            })
            .collect())
    }
}

/// `M` realizations of a [`KlModel`] on its grid with the coefficients that
/// produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    model: KlModel,
    seed: u64,
    /// `M × N` coefficient draws.
    xi: Matrix,
    /// `M × n` field values at the grid nodes.
    fields: Matrix,
}

impl SampleBatch {
    /// Builds a batch from caller-supplied coefficients (row per realization).
    /// Used for synthetic and negative-control batches.
    pub fn from_coefficients(model: KlModel, xi: Matrix, seed: u64) -> Result<Self> {
        check_len(model.truncation, xi.ncols())?;
        let n = model.grid_len();
        let mut fields = Matrix::zeros(xi.nrows(), n);
        fields
            .as_mut_slice()
            .par_chunks_mut(n.max(1))
            .zip(xi.as_slice().par_chunks(model.truncation))
            .for_each(|(row, x)| model.synthesize_into(x, row));
        Ok(Self {
            model,
            seed,
            xi,
            fields,
        })
    }

    pub fn model(&self) -> &KlModel {
        &self.model
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn samples(&self) -> usize {
        self.xi.nrows()
    }

    pub fn xi(&self) -> &Matrix {
        &self.xi
    }

    pub fn fields(&self) -> &Matrix {
        &self.fields
    }

    /// Every realization at an arbitrary point `t` of the domain.
    pub fn values_at(&self, t: f64) -> Result<Vec<f64>> {
        let m = &self.model;
        let e = m.spectrum.evaluate_modes(&[t], m.truncation)?;
        let coef: Vec<f64> = e
            .row(0)
            .iter()
            .zip(&m.sqrt_lambda)
            .map(|(e, s)| s * e)
            .collect();
        Ok((0..self.samples())
            .map(|r| self.xi.row(r).iter().zip(&coef).map(|(x, c)| x * c).sum())
            .collect())
    }
}

/// Draws `m` realizations. Coefficient `ξ[r][i]` is entry `(r, i)` of the
/// seed's normal table, so any thread count gives the same batch bit for bit.
pub fn sample_batch(model: &KlModel, m: usize, seed: u64) -> Result<SampleBatch> {
    if m == 0 {
        return Err(KlError::InvalidParameter(
            "sample count must be positive".into(),
        ));
    }
    let nt = model.truncation;
    let mut xi = Matrix::zeros(m, nt);
    xi.as_mut_slice()
        .par_chunks_mut(nt)
        .enumerate()
        .for_each(|(r, row)| rng::fill_standard_normal_row(seed, r as u64, row));
    SampleBatch::from_coefficients(model.clone(), xi, seed)
}

/// `ξ̂ᵢ = ⟨X, eᵢ⟩ / √λᵢ` for `i ≤ N`, from field values at the grid nodes.
pub fn project_coefficients(model: &KlModel, field_values: &[f64]) -> Result<Vec<f64>> {
    check_len(model.grid_len(), field_values.len())?;
    (0..model.truncation)
        .map(|i| {
            model.spectrum.check_usable(i)?;
            Ok(spectral::project(&model.spectrum, field_values, i)? / model.sqrt_lambda[i])
        })
        .collect()
}

/// One realization seen at several truncation orders.
#[derive(Debug, Clone, PartialEq)]
pub struct Refinement {
    pub orders: Vec<usize>,
    pub points: Vec<f64>,
    /// `curves[k][p] = X_{orders[k]}(points[p])`.
    pub curves: Vec<Vec<f64>>,
    /// The shared leading coefficients, length `max(orders)`.
    pub xi: Vec<f64>,
}

/// Evaluates realization `realization` of the seed's table at increasing
/// truncation orders. All orders share the same leading `ξᵢ`, so consecutive
/// curves differ only by the added modes.
pub fn refinement_trajectories(
    spectrum: &Spectrum,
    orders: &[usize],
    seed: u64,
    realization: u64,
    points: &[f64],
) -> Result<Refinement> {
    if orders.is_empty() {
        return Err(KlError::InvalidParameter(
            "no truncation orders given".into(),
        ));
    }
    if orders.windows(2).any(|w| w[0] > w[1]) {
        return Err(KlError::InvalidParameter(
            "truncation orders must be nondecreasing".into(),
        ));
    }
    let n_max = *orders.last().expect("nonempty");
    let model = KlModel::new(spectrum.clone(), n_max)?;
    if orders[0] == 0 {
        return Err(KlError::InvalidParameter(
            "truncation orders must be positive".into(),
        ));
    }
    let mut xi = vec![0.0; n_max];
    rng::fill_standard_normal_row(seed, realization, &mut xi);
    let e = spectrum.evaluate_modes(points, n_max)?;
    let curves = orders
        .iter()
        .map(|&n| {
            (0..points.len())
                .map(|p| {
                    (0..n)
                        .map(|i| model.sqrt_lambda[i] * xi[i] * e[(p, i)])
                        .sum()
                })
                .collect()
        })
        .collect();
    Ok(Refinement {
        orders: orders.to_vec(),
        points: points.to_vec(),
        curves,
        xi,
    })
}
