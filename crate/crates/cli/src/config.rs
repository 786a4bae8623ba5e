use std::fs;
use std::path::{Path, PathBuf};

use klfield::spectral::EigenSolver;
use klfield::{Domain, Grid, Kernel, KernelKind, Method, Rule};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// Seed used by the reference configuration and the acceptance suite.
pub const REFERENCE_SEED: u64 = 20_240_917;

const DEFAULT_REFINEMENT: [usize; 4] = [2, 6, 20, 50];

/// One JSON file describing a whole run. Unknown keys are rejected.
///
/// ```json
/// {
///   "kernel": {"kind": "exponential", "sigma2": 1.0, "corr_len": 1.0, "domain": [0.0, 1.0]},
///   "grid": {"rule": "trapezoid", "n": 500, "domain": [0.0, 1.0]},
///   "method": "nystrom",
///   "n_modes": 50,
///   "truncation": 6,
///   "samples": 20000,
///   "seed": 20240917,
///   "output_dir": "out"
/// }
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub kernel: Kernel,
    pub grid: Grid,
    #[serde(default)]
    pub method: Method,
    #[serde(default)]
    pub solver: EigenSolver,
    pub n_modes: usize,
    pub truncation: usize,
    pub samples: usize,
    pub seed: u64,
    pub output_dir: PathBuf,
    #[serde(default = "default_eval_n")]
    pub eval_n: usize,
    /// Point of the marginal normality check; the domain midpoint if absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_marginal: Option<f64>,
    /// Truncation orders for refinement trajectories.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refinement_orders: Option<Vec<usize>>,
    /// Orders at which `mercer` also writes the full error surface.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub surface_orders: Vec<usize>,
    /// Realizations written by `figures`.
    #[serde(default = "default_realizations")]
    pub realizations: usize,
}

fn default_eval_n() -> usize {
    klfield::mercer::DEFAULT_EVAL_N
}

fn default_realizations() -> usize {
    10
}

impl RunConfig {
    /// Exponential kernel with unit variance and correlation length on
    /// `[0, 1]`, 500-node trapezoid grid, six retained modes.
    pub fn reference() -> Self {
        let domain = Domain::new(0.0, 1.0).expect("unit interval");
        RunConfig {
            kernel: Kernel::new(KernelKind::Exponential, 1.0, 1.0, domain).expect("valid kernel"),
            grid: Grid::new(domain, 500, Rule::Trapezoid).expect("valid grid"),
            method: Method::Nystrom,
            solver: EigenSolver::Auto,
            n_modes: 50,
            truncation: 6,
            samples: 20_000,
            seed: REFERENCE_SEED,
            output_dir: PathBuf::from("klfield-figures"),
            eval_n: default_eval_n(),
            t_marginal: None,
            refinement_orders: None,
            surface_orders: Vec::new(),
            realizations: default_realizations(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(CliError::Config(msg));
        if self.kernel.domain() != self.grid.domain() {
            return bad(format!(
                "kernel domain {:?} and grid domain {:?} differ",
                self.kernel.domain(),
                self.grid.domain()
            ));
        }
        for (name, v) in [
            ("n_modes", self.n_modes),
            ("truncation", self.truncation),
            ("samples", self.samples),
            ("eval_n", self.eval_n),
        ] {
            if v == 0 {
                return bad(format!("{name} must be positive"));
            }
        }
        if self.eval_n < 2 {
            return bad("eval_n must be at least 2".into());
        }
        if self.n_modes > self.grid.len() {
            return bad(format!(
                "n_modes = {} exceeds the grid size {}",
                self.n_modes,
                self.grid.len()
            ));
        }
        if self.truncation > self.n_modes {
            return bad(format!(
                "truncation = {} exceeds n_modes = {}",
                self.truncation, self.n_modes
            ));
        }
        if let Some(t) = self.t_marginal {
            if !self.grid.domain().contains(t) {
                return bad(format!("t_marginal = {t} lies outside the domain"));
            }
        }
        if let Some(orders) = &self.refinement_orders {
            if orders.is_empty() {
                return bad("refinement_orders is empty".into());
            }
            if orders.windows(2).any(|w| w[1] < w[0]) {
                return bad("refinement_orders must be nondecreasing".into());
            }
            check_orders("refinement_orders", orders, self.n_modes)?;
        }
        check_orders("surface_orders", &self.surface_orders, self.n_modes)?;
        Ok(())
    }

    pub fn marginal_point(&self) -> f64 {
        self.t_marginal
            .unwrap_or_else(|| self.grid.domain().midpoint())
    }

    pub fn refinement(&self) -> Vec<usize> {
        match &self.refinement_orders {
            Some(o) => o.clone(),
            None => {
                let o: Vec<usize> = DEFAULT_REFINEMENT
                    .into_iter()
                    .filter(|&k| k <= self.n_modes)
                    .collect();
                if o.is_empty() {
                    vec![self.n_modes]
                } else {
                    o
                }
            }
        }
    }
}

fn check_orders(name: &str, orders: &[usize], n_modes: usize) -> Result<()> {
    match orders.iter().find(|&&k| k == 0 || k > n_modes) {
        Some(k) => Err(CliError::Config(format!(
            "{name} entry {k} is outside 1..={n_modes}"
        ))),
        None => Ok(()),
    }
}
