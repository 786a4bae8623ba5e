//! Empirical checks on a [`SampleBatch`]: coefficient moments, covariance of
//! the realizations, and normality of a point marginal.

use serde::Serialize;

use crate::error::{KlError, Result};
use crate::linalg::Matrix;

use super::SampleBatch;

/// Asymptotic Kolmogorov–Smirnov critical value at α ≈ 0.01; the threshold is
/// `KS_CRITICAL_VALUE / √M`.
pub const KS_CRITICAL_VALUE: f64 = 1.63;

/// Per-mode moments of the coefficient draws with 4σ CLT flags.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefficientStatistics {
    pub samples: usize,
    pub means: Vec<f64>,
    /// Sample variances (divisor `M − 1`).
    pub variances: Vec<f64>,
    /// `⟨ξᵢ ξⱼ⟩` averaged over realizations.
    pub second_moments: Vec<Vec<f64>>,
    pub mean_tolerance: f64,
    pub variance_tolerance: f64,
    pub correlation_tolerance: f64,
    /// Modes whose `|mean| > mean_tolerance`.
    pub mean_flags: Vec<usize>,
    /// Modes whose `|variance − 1| > variance_tolerance`.
    pub variance_flags: Vec<usize>,
    /// Pairs `i < j` whose `|⟨ξᵢ ξⱼ⟩| > correlation_tolerance`.
    pub correlation_flags: Vec<(usize, usize)>,
}

impl CoefficientStatistics {
    pub fn passed(&self) -> bool {
        self.mean_flags.is_empty()
            && self.variance_flags.is_empty()
            && self.correlation_flags.is_empty()
    }
}

fn require_samples(batch: &SampleBatch, min: usize) -> Result<usize> {
    let m = batch.samples();
    if m < min {
        return Err(KlError::InvalidParameter(format!(
            "need at least {min} realizations, got {m}"
        )));
    }
    Ok(m)
}

/// Means, variances and cross moments of `ξ` with flags at
/// `4/√M`, `4√(2/M)` and `4/√M`.
pub fn coefficient_statistics(batch: &SampleBatch) -> Result<CoefficientStatistics> {
    let m = require_samples(batch, 2)?;
    let xi = batch.xi();
    let nt = xi.ncols();
    let mf = m as f64;

    let mut sums = vec![0.0; nt];
    let mut cross = Matrix::zeros(nt, nt);
    for r in 0..m {
        let row = xi.row(r);
        for i in 0..nt {
            sums[i] += row[i];
            for j in i..nt {
                cross[(i, j)] += row[i] * row[j];
            }
        }
    }
    let means: Vec<f64> = sums.iter().map(|s| s / mf).collect();
    let mut variances = vec![0.0; nt];
    for r in 0..m {
        for (i, v) in variances.iter_mut().enumerate() {
            let d = xi[(r, i)] - means[i];
            *v += d * d;
        }
    }
    variances.iter_mut().for_each(|v| *v /= mf - 1.0);
    let mut second_moments = vec![vec![0.0; nt]; nt];
    for i in 0..nt {
        for j in i..nt {
            let v = cross[(i, j)] / mf;
            second_moments[i][j] = v;
            second_moments[j][i] = v;
        }
    }

    let mean_tolerance = 4.0 / mf.sqrt();
    let variance_tolerance = 4.0 * (2.0 / mf).sqrt();
    let correlation_tolerance = 4.0 / mf.sqrt();
    let mean_flags = (0..nt)
        .filter(|&i| !(means[i].abs() <= mean_tolerance))
        .collect();
    let variance_flags = (0..nt)
        .filter(|&i| !((variances[i] - 1.0).abs() <= variance_tolerance))
        .collect();
    let mut correlation_flags = Vec::new();
    for i in 0..nt {
        for j in i + 1..nt {
            if !(second_moments[i][j].abs() <= correlation_tolerance) {
                correlation_flags.push((i, j));
            }
        }
    }
    Ok(CoefficientStatistics {
        samples: m,
        means,
        variances,
        second_moments,
        mean_tolerance,
        variance_tolerance,
        correlation_tolerance,
        mean_flags,
        variance_flags,
        correlation_flags,
    })
}

/// Empirical covariance of the realizations at the grid nodes compared with
/// the truncated and the full kernel.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CovarianceReport {
    pub samples: usize,
    #[serde(skip)]
    pub matrix: Matrix,
    /// `sup |Ĉ − R_N|` over node pairs.
    pub sup_vs_truncated: f64,
    /// `sup |Ĉ − R|` over node pairs.
    pub sup_vs_kernel: f64,
    /// `5 √(2/M) σ²`, the Monte Carlo envelope for `sup_vs_truncated`.
    pub envelope: f64,
}

impl CovarianceReport {
    pub fn within_envelope(&self) -> bool {
        self.sup_vs_truncated <= self.envelope
    }
}

/// `Ĉ[j][k] = (1/M) Σ_m X_m(tⱼ) X_m(tₖ)`; the process is centred so no mean is
/// subtracted.
pub fn empirical_covariance(batch: &SampleBatch) -> Result<CovarianceReport> {
    let m = require_samples(batch, 2)?;
    let fields = batch.fields();
    let n = fields.ncols();
    let mut c = Matrix::zeros(n, n);
    for r in 0..m {
        let f = fields.row(r);
        for j in 0..n {
            let fj = f[j];
            for (acc, &fk) in c.row_mut(j)[j..].iter_mut().zip(&f[j..]) {
                *acc += fj * fk;
            }
        }
    }
    let inv = 1.0 / m as f64;
    for j in 0..n {
        for k in j..n {
            let v = c[(j, k)] * inv;
            c[(j, k)] = v;
            c[(k, j)] = v;
        }
    }

    let model = batch.model();
    let spectrum = model.spectrum();
    let kernel = model.kernel();
    let nodes = spectrum.grid().nodes();
    let lams = spectrum.eigenvalues();
    let nt = model.truncation();
    let mut sup_trunc = 0.0f64;
    let mut sup_kernel = 0.0f64;
    for j in 0..n {
        for k in j..n {
            let r_n: f64 = (0..nt)
                .map(|i| {
                    let e = spectrum.eigenfunction_values(i);
                    lams[i] * (e[j] * e[k])
                })
                .sum();
            sup_trunc = sup_trunc.max((c[(j, k)] - r_n).abs());
            sup_kernel = sup_kernel.max((c[(j, k)] - kernel.eval(nodes[j], nodes[k])).abs());
        }
    }
    Ok(CovarianceReport {
        samples: m,
        matrix: c,
        sup_vs_truncated: sup_trunc,
        sup_vs_kernel: sup_kernel,
        envelope: 5.0 * (2.0 / m as f64).sqrt() * kernel.sigma2(),
    })
}

/// Kolmogorov–Smirnov comparison of the standardized marginal at `t` with
/// the standard normal.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KsReport {
    pub t: f64,
    pub samples: usize,
    /// `v_N(t)` used to standardize.
    pub variance: f64,
    pub statistic: f64,
    pub threshold: f64,
}

impl KsReport {
    pub fn passed(&self) -> bool {
        self.statistic <= self.threshold
    }
}

/// Interpolates every realization to `t`, divides by `√v_N(t)` and computes
/// the KS distance to `N(0, 1)`. Needs at least 100 realizations.
pub fn marginal_normality(batch: &SampleBatch, t: f64) -> Result<KsReport> {
    let m = require_samples(batch, 100)?;
    let model = batch.model();
    let variance = model.variance_at(t)?;
    if !(variance >= 1e-12 * model.kernel().sigma2()) || variance <= 0.0 {
        return Err(KlError::InvalidParameter(format!(
            "truncated variance {variance:e} at t = {t} is too small to standardize"
        )));
    }
    let sd = variance.sqrt();
    let mut z: Vec<f64> = batch.values_at(t)?.into_iter().map(|x| x / sd).collect();
    Ok(KsReport {
        t,
        samples: m,
        variance,
        statistic: ks_statistic_normal(&mut z),
        threshold: KS_CRITICAL_VALUE / (m as f64).sqrt(),
    })
}

/// Standard normal CDF.
pub(crate) fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// `sup |F_M − Φ|` for the sample `z` (sorted in place).
pub(crate) fn ks_statistic_normal(z: &mut [f64]) -> f64 {
    z.sort_by(f64::total_cmp);
    let m = z.len() as f64;
    z.iter().enumerate().fold(0.0f64, |d, (i, &x)| {
        let f = normal_cdf(x);
        d.max(f - i as f64 / m).max((i + 1) as f64 / m - f)
    })
}
