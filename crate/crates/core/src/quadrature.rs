//! Quadrature grids on an interval: the discrete stand-in for `L²(D)`.

use serde::{Deserialize, Serialize};

use crate::error::{check_len, KlError, Result};
use crate::kernels::Domain;

/// Quadrature rule used to build a [`Grid`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    /// Composite trapezoid on uniform nodes, endpoints included.
    #[default]
    Trapezoid,
    /// `n`-point Gauss–Legendre mapped affinely onto the domain.
    GaussLegendre,
}

/// Nodes `t₁ < … < tₙ` in `[a, b]` with positive weights summing to `b − a`.
///
/// Only the rule, size and domain are serialized; nodes and weights are
/// regenerated on load.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridDescriptor", into = "GridDescriptor")]
pub struct Grid {
    domain: Domain,
    rule: Rule,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

/// Wire form of [`Grid`]: `{"rule": "trapezoid", "n": 101, "domain": [0, 1]}`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridDescriptor {
    #[serde(default)]
    pub rule: Rule,
    pub n: usize,
    pub domain: Domain,
}

impl TryFrom<GridDescriptor> for Grid {
    type Error = KlError;

    fn try_from(d: GridDescriptor) -> Result<Self> {
        Grid::new(d.domain, d.n, d.rule)
    }
}

impl From<Grid> for GridDescriptor {
    fn from(g: Grid) -> Self {
        GridDescriptor {
            rule: g.rule,
            n: g.len(),
            domain: g.domain,
        }
    }
}

impl Grid {
    pub fn new(domain: Domain, n: usize, rule: Rule) -> Result<Self> {
        if n < 2 {
            return Err(KlError::InvalidParameter(format!(
                "a grid needs at least 2 nodes, got {n}"
            )));
        }
        let (nodes, weights) = match rule {
            Rule::Trapezoid => {
                let nodes = uniform_points(domain, n);
                let h = domain.length() / (n - 1) as f64;
                let mut weights = vec![h; n];
                weights[0] = 0.5 * h;
                weights[n - 1] = 0.5 * h;
                (nodes, weights)
            }
            Rule::GaussLegendre => {
                let (x, w) = gauss_legendre(n)?;
                let half = 0.5 * domain.length();
                let mid = domain.midpoint();
                let nodes = x.iter().map(|&xi| mid + half * xi).collect();
                let weights = w.iter().map(|&wi| half * wi).collect();
                (nodes, weights)
            }
        };
        Ok(Self {
            domain,
            rule,
            nodes,
            weights,
        })
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn rule(&self) -> Rule {
        self.rule
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Index of the node exactly equal to `t`, if any.
    pub fn node_index(&self, t: f64) -> Option<usize> {
        self.nodes.binary_search_by(|x| x.total_cmp(&t)).ok()
    }

    /// `Σ wᵢ fᵢ`.
    pub fn integrate(&self, values: &[f64]) -> Result<f64> {
        check_len(self.len(), values.len())?;
        Ok(self.weights.iter().zip(values).map(|(w, v)| w * v).sum())
    }

    /// Discrete `⟨u, v⟩ = Σ wᵢ uᵢ vᵢ`.
    pub fn inner_product(&self, u: &[f64], v: &[f64]) -> Result<f64> {
        check_len(self.len(), u.len())?;
        check_len(self.len(), v.len())?;
        Ok(weighted_dot(&self.weights, u, v))
    }

    /// Discrete `L²(D)` norm.
    pub fn norm(&self, u: &[f64]) -> Result<f64> {
        self.inner_product(u, u).map(f64::sqrt)
    }
}

pub(crate) fn weighted_dot(w: &[f64], u: &[f64], v: &[f64]) -> f64 {
    w.iter().zip(u).zip(v).map(|((w, u), v)| w * u * v).sum()
}

/// Free-function form of [`Grid::new`].
pub fn make_grid(domain: Domain, n: usize, rule: Rule) -> Result<Grid> {
    Grid::new(domain, n, rule)
}

/// `n` equispaced points from `a` to `b`, both endpoints hit exactly.
///
/// Trapezoid grids and evaluation lattices share this formula, so a lattice
/// of the same size lands bit for bit on the grid nodes.
pub fn uniform_points(domain: Domain, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![domain.a()],
        _ => {
            let (a, len) = (domain.a(), domain.length());
            let last = (n - 1) as f64;
            let mut pts: Vec<f64> = (0..n).map(|i| a + len * (i as f64 / last)).collect();
            pts[n - 1] = domain.b();
            pts
        }
    }
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[−1, 1]`, nodes
/// ascending.
///
/// Each positive root of `Pₙ` is found by Newton iteration from the
/// `cos(π(k − ¼)/(n + ½))` initial guess; the negative half is mirrored.
pub fn gauss_legendre(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    const TOL: f64 = 1e-14;
    const MAX_ITER: usize = 100;

    if n == 0 {
        return Err(KlError::InvalidParameter(
            "Gauss-Legendre needs n >= 1".into(),
        ));
    }
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for k in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (k as f64 + 0.75) / (nf + 0.5)).cos();
        let mut converged = false;
        for _ in 0..MAX_ITER {
            let (p, d) = legendre_with_derivative(n, z);
            let step = p / d;
            z -= step;
            if step.abs() <= TOL {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(KlError::NumericFailure(format!(
                "Gauss-Legendre root {k} of n = {n} did not converge"
            )));
        }
        let (_, dp) = legendre_with_derivative(n, z);
        let wk = 2.0 / ((1.0 - z * z) * dp * dp);
        // root k counts down from +1; store ascending.
        x[n - 1 - k] = z;
        x[k] = -z;
        w[n - 1 - k] = wk;
        w[k] = wk;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    Ok((x, w))
}

/// `(Pₙ(z), Pₙ'(z))` by the three-term recurrence.
fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    for j in 2..=n {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * z * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    let (p, pm1) = if n == 1 { (z, 1.0) } else { (p1, p0) };
    let d = n as f64 * (z * p - pm1) / (z * z - 1.0);
    (p, d)
}
