//! The subcommands. Each writes into `output_dir` and returns what it wrote.

use klfield::mercer::{error_surface, reconstruction_report};
use klfield::simulate::{
    coefficient_statistics, empirical_covariance, marginal_normality, refinement_trajectories,
    sample_batch, CoefficientStatistics, CovarianceReport, KlModel, KsReport, SampleBatch,
};
use klfield::spectral::{
    analytic_spectrum_exponential, nystrom_spectrum_with, JACOBI_MAX_SWEEPS, JACOBI_TOLERANCE,
    ROOT_TOLERANCE, ZERO_MODE_CUTOFF,
};
use klfield::{KernelKind, KlError, Method, Spectrum};
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::Result;
use crate::output::{ensure_dir, fmt, write_csv, write_json, Written};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    Eigs,
    Mercer,
    Sample,
    Verify,
    Figures,
}

#[derive(Debug)]
pub struct Outcome {
    pub files: Vec<String>,
    /// False when a statistical flag tripped.
    pub passed: bool,
}

pub fn run(task: Task, cfg: &RunConfig) -> Result<Outcome> {
    cfg.validate()?;
    ensure_dir(&cfg.output_dir)?;
    let mut out = Written::new(&cfg.output_dir);
    let spectrum = compute_spectrum(cfg)?;
    let passed = match task {
        Task::Eigs => {
            write_eigs(cfg, &spectrum, &mut out)?;
            true
        }
        Task::Mercer => {
            write_mercer(cfg, &spectrum, &cfg.surface_orders, &mut out)?;
            true
        }
        Task::Sample => {
            let batch = draw(cfg, &spectrum)?;
            write_samples(cfg, &batch, &mut out)?;
            true
        }
        Task::Verify => {
            let batch = draw(cfg, &spectrum)?;
            write_verify(cfg, &batch, &mut out)?
        }
        Task::Figures => figures(cfg, &spectrum, &mut out)?,
    };
    Ok(Outcome {
        files: out.files,
        passed,
    })
}

pub fn compute_spectrum(cfg: &RunConfig) -> Result<Spectrum> {
    Ok(match cfg.method {
        Method::Nystrom => nystrom_spectrum_with(&cfg.kernel, &cfg.grid, cfg.n_modes, cfg.solver)?,
        Method::Analytic => analytic_spectrum_exponential(&cfg.kernel, &cfg.grid, cfg.n_modes)?,
    })
}

fn check_truncation(spectrum: &Spectrum, n: usize) -> Result<()> {
    let usable = spectrum.usable_modes();
    if n > usable {
        return Err(KlError::ZeroMode {
            mode: usable,
            eigenvalue: spectrum.eigenvalues()[usable],
        }
        .into());
    }
    Ok(())
}

fn draw(cfg: &RunConfig, spectrum: &Spectrum) -> Result<SampleBatch> {
    check_truncation(spectrum, cfg.truncation)?;
    let model = KlModel::new(spectrum.clone(), cfg.truncation)?;
    Ok(sample_batch(&model, cfg.samples, cfg.seed)?)
}

/// The config as echoed into manifests. The output directory is left out so
/// that runs into different directories stay byte-identical.
fn echo(cfg: &RunConfig) -> serde_json::Value {
    let mut v = serde_json::to_value(cfg).expect("config is plain data");
    if let Some(obj) = v.as_object_mut() {
        obj.remove("output_dir");
    }
    v
}

fn node_header(spectrum: &Spectrum) -> Vec<String> {
    spectrum.grid().nodes().iter().map(|&t| fmt(t)).collect()
}

#[derive(Serialize)]
struct Tolerances {
    jacobi_off_diagonal: f64,
    jacobi_max_sweeps: usize,
    root_bisection: f64,
    zero_mode_cutoff: f64,
}

#[derive(Serialize)]
struct EigsSidecar<'a> {
    config: serde_json::Value,
    n_modes: usize,
    usable_modes: usize,
    eigenvalue_sum: f64,
    kernel_trace: f64,
    orthonormality_defect: f64,
    max_residual_over_lambda1: f64,
    tolerances: Tolerances,
    csv: &'a str,
}

pub fn write_eigs(cfg: &RunConfig, spectrum: &Spectrum, out: &mut Written) -> Result<()> {
    let mut header = vec!["mode".to_string(), "eigenvalue".to_string()];
    header.extend(node_header(spectrum));
    let rows = spectrum.eigenvalues().iter().enumerate().map(|(i, &lam)| {
        let mut row = vec![(i + 1).to_string(), fmt(lam)];
        row.extend(spectrum.eigenfunction_values(i).iter().map(|&v| fmt(v)));
        row
    });
    write_csv(&out.path("eigs.csv"), &header, rows)?;

    let lams = spectrum.eigenvalues();
    let worst = (0..spectrum.n_modes())
        .map(|i| spectrum.residual_norm(i))
        .fold(0.0f64, f64::max);
    let sidecar = EigsSidecar {
        config: echo(cfg),
        n_modes: spectrum.n_modes(),
        usable_modes: spectrum.usable_modes(),
        eigenvalue_sum: lams.iter().sum(),
        kernel_trace: cfg.kernel.trace(),
        orthonormality_defect: spectrum.orthonormality_defect(spectrum.n_modes()),
        max_residual_over_lambda1: worst / lams[0],
        tolerances: Tolerances {
            jacobi_off_diagonal: JACOBI_TOLERANCE,
            jacobi_max_sweeps: JACOBI_MAX_SWEEPS,
            root_bisection: ROOT_TOLERANCE,
            zero_mode_cutoff: ZERO_MODE_CUTOFF,
        },
        csv: "eigs.csv",
    };
    write_json(&out.path("eigs.json"), &sidecar)
}

#[derive(Serialize)]
struct MercerSummary {
    config: serde_json::Value,
    eval_n: usize,
    truncation: usize,
    max_abs_error: f64,
    l2_error: f64,
    curve_max_n: usize,
    surfaces: Vec<String>,
}

pub fn write_mercer(
    cfg: &RunConfig,
    spectrum: &Spectrum,
    surface_orders: &[usize],
    out: &mut Written,
) -> Result<()> {
    check_truncation(spectrum, cfg.truncation)?;
    let n_max = cfg.n_modes.min(spectrum.usable_modes());
    let report = reconstruction_report(spectrum, &cfg.kernel, n_max, cfg.eval_n)?;
    let rows = report
        .per_n_curve
        .iter()
        .map(|p| vec![p.n.to_string(), fmt(p.max_abs_error), fmt(p.l2_error)]);
    let header = ["n", "max_abs_error", "l2_error"].map(String::from);
    write_csv(&out.path("mercer_curve.csv"), &header, rows)?;

    let mut surfaces = Vec::new();
    for &n in surface_orders {
        check_truncation(spectrum, n)?;
        let name = format!("mercer_surface_N{n}.csv");
        let points = error_surface(spectrum, &cfg.kernel, n, cfg.eval_n)?;
        let header = ["s", "t", "r_x", "r_x_n", "difference"].map(String::from);
        let rows = points.iter().map(|p| {
            vec![
                fmt(p.s),
                fmt(p.t),
                fmt(p.r_x),
                fmt(p.r_x_n),
                fmt(p.difference),
            ]
        });
        write_csv(&out.path(&name), &header, rows)?;
        surfaces.push(name);
    }

    let at = &report.per_n_curve[cfg.truncation - 1];
    let summary = MercerSummary {
        config: echo(cfg),
        eval_n: cfg.eval_n,
        truncation: cfg.truncation,
        max_abs_error: at.max_abs_error,
        l2_error: at.l2_error,
        curve_max_n: n_max,
        surfaces,
    };
    write_json(&out.path("mercer.json"), &summary)
}

#[derive(Serialize)]
struct SampleManifest {
    config: serde_json::Value,
    generator: &'static str,
    seed: u64,
    samples: usize,
    truncation: usize,
    fields: &'static str,
    coefficients: &'static str,
}

pub fn write_samples(cfg: &RunConfig, batch: &SampleBatch, out: &mut Written) -> Result<()> {
    let spectrum = batch.model().spectrum();
    let fields = batch.fields();
    let rows = (0..batch.samples()).map(|r| fields.row(r).iter().map(|&v| fmt(v)).collect());
    write_csv(&out.path("samples.csv"), &node_header(spectrum), rows)?;

    let xi = batch.xi();
    let header: Vec<String> = (1..=xi.ncols()).map(|i| format!("xi_{i}")).collect();
    let rows = (0..batch.samples()).map(|r| xi.row(r).iter().map(|&v| fmt(v)).collect());
    write_csv(&out.path("coefficients.csv"), &header, rows)?;

    let manifest = SampleManifest {
        config: echo(cfg),
        generator: "philox4x32-10 + box-muller",
        seed: batch.seed(),
        samples: batch.samples(),
        truncation: batch.model().truncation(),
        fields: "samples.csv",
        coefficients: "coefficients.csv",
    };
    write_json(&out.path("samples.json"), &manifest)
}

#[derive(Serialize)]
struct Flags {
    coefficient_means: Vec<usize>,
    coefficient_variances: Vec<usize>,
    coefficient_correlations: Vec<(usize, usize)>,
    marginal_normality: bool,
    covariance_envelope: bool,
}

#[derive(Serialize)]
struct VerifyReport {
    config: serde_json::Value,
    seed: u64,
    samples: usize,
    truncation: usize,
    coefficients: CoefficientStatistics,
    marginal: KsReport,
    covariance: CovarianceReport,
    /// Sup of `|R − R_N|` over the Mercer lattice, for comparison with
    /// `covariance.sup_vs_kernel`.
    mercer_max_abs_error: f64,
    /// Tripped checks: offending mode indices (0-based), or `true`.
    flags: Flags,
    passed: bool,
}

/// Writes `verify.json` and reports whether every check held.
pub fn write_verify(cfg: &RunConfig, batch: &SampleBatch, out: &mut Written) -> Result<bool> {
    let spectrum = batch.model().spectrum();
    let coefficients = coefficient_statistics(batch)?;
    let marginal = marginal_normality(batch, cfg.marginal_point())?;
    let covariance = empirical_covariance(batch)?;
    let mercer = reconstruction_report(spectrum, &cfg.kernel, cfg.truncation, cfg.eval_n)?;

    let flags = Flags {
        coefficient_means: coefficients.mean_flags.clone(),
        coefficient_variances: coefficients.variance_flags.clone(),
        coefficient_correlations: coefficients.correlation_flags.clone(),
        marginal_normality: !marginal.passed(),
        covariance_envelope: !covariance.within_envelope(),
    };
    let passed = coefficients.passed() && marginal.passed() && covariance.within_envelope();
    let report = VerifyReport {
        config: echo(cfg),
        seed: batch.seed(),
        samples: batch.samples(),
        truncation: batch.model().truncation(),
        coefficients,
        marginal,
        covariance,
        mercer_max_abs_error: mercer.max_abs_error,
        flags,
        passed,
    };
    write_json(&out.path("verify.json"), &report)?;
    Ok(passed)
}

const FIGURE_SURFACES: [usize; 4] = [2, 4, 6, 8];

#[derive(Serialize)]
struct FiguresManifest {
    config: serde_json::Value,
    files: Vec<String>,
    passed: bool,
}

/// Every dataset: spectra, Mercer curve and surfaces, realizations, the
/// marginal at `t_marginal`, refinement trajectories and the statistics.
fn figures(cfg: &RunConfig, spectrum: &Spectrum, out: &mut Written) -> Result<bool> {
    write_eigs(cfg, spectrum, out)?;
    if cfg.kernel.kind() == KernelKind::Exponential {
        write_comparison(cfg, spectrum, out)?;
    }

    let mut surfaces: Vec<usize> = FIGURE_SURFACES
        .into_iter()
        .chain(cfg.surface_orders.iter().copied())
        .filter(|&n| n <= spectrum.usable_modes())
        .collect();
    surfaces.sort_unstable();
    surfaces.dedup();
    write_mercer(cfg, spectrum, &surfaces, out)?;

    let batch = draw(cfg, spectrum)?;
    let shown = cfg.realizations.min(batch.samples());
    let fields = batch.fields();
    let rows = (0..shown).map(|r| fields.row(r).iter().map(|&v| fmt(v)).collect());
    write_csv(&out.path("realizations.csv"), &node_header(spectrum), rows)?;

    let t = cfg.marginal_point();
    let values = batch.values_at(t)?;
    let rows = values
        .iter()
        .enumerate()
        .map(|(r, &v)| vec![r.to_string(), fmt(v)]);
    let header = ["realization", "value"].map(String::from);
    write_csv(&out.path("marginal.csv"), &header, rows)?;

    write_refinement(cfg, spectrum, out)?;
    let passed = write_verify(cfg, &batch, out)?;

    let manifest = FiguresManifest {
        config: echo(cfg),
        files: out.files.clone(),
        passed,
    };
    write_json(&out.path("figures.json"), &manifest)?;
    Ok(passed)
}

fn write_comparison(cfg: &RunConfig, spectrum: &Spectrum, out: &mut Written) -> Result<()> {
    let analytic = analytic_spectrum_exponential(&cfg.kernel, &cfg.grid, cfg.n_modes)?;
    let nystrom = match cfg.method {
        Method::Nystrom => spectrum.clone(),
        Method::Analytic => nystrom_spectrum_with(&cfg.kernel, &cfg.grid, cfg.n_modes, cfg.solver)?,
    };
    let rows = nystrom
        .eigenvalues()
        .iter()
        .zip(analytic.eigenvalues())
        .enumerate()
        .map(|(i, (&n, &a))| vec![(i + 1).to_string(), fmt(n), fmt(a), fmt((n - a).abs() / a)]);
    let header = ["mode", "nystrom", "analytic", "relative_difference"].map(String::from);
    write_csv(&out.path("eigenvalue_comparison.csv"), &header, rows)
}

/// Two realizations evaluated at every refinement order, long format.
fn write_refinement(cfg: &RunConfig, spectrum: &Spectrum, out: &mut Written) -> Result<()> {
    let orders = cfg.refinement();
    let usable = spectrum.usable_modes();
    let orders: Vec<usize> = orders.into_iter().filter(|&k| k <= usable).collect();
    let nodes = spectrum.grid().nodes();
    let mut rows = Vec::new();
    if !orders.is_empty() {
        for realization in 0..2u64 {
            let r = refinement_trajectories(spectrum, &orders, cfg.seed, realization, nodes)?;
            for (order, curve) in r.orders.iter().zip(&r.curves) {
                for (&t, &v) in nodes.iter().zip(curve) {
                    rows.push(vec![
                        realization.to_string(),
                        order.to_string(),
                        fmt(t),
                        fmt(v),
                    ]);
                }
            }
        }
    }
    let header = ["realization", "order", "t", "value"].map(String::from);
    write_csv(&out.path("refinement.csv"), &header, rows)
}
