//! Autocorrelation kernels on a bounded interval.

use serde::{Deserialize, Serialize};

use crate::error::{KlError, Result};
use crate::linalg::Matrix;
use crate::quadrature::Grid;

/// A bounded interval `[a, b]` with `a < b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 2]", into = "[f64; 2]")]
pub struct Domain {
    a: f64,
    b: f64,
}

impl Domain {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) || a >= b {
            return Err(KlError::InvalidParameter(format!(
                "domain [{a}, {b}] must be a finite interval with a < b"
            )));
        }
        Ok(Self { a, b })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn length(&self) -> f64 {
        self.b - self.a
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.a + self.b)
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.a && t <= self.b
    }
}

impl TryFrom<[f64; 2]> for Domain {
    type Error = KlError;

    fn try_from(v: [f64; 2]) -> Result<Self> {
        Domain::new(v[0], v[1])
    }
}

impl From<Domain> for [f64; 2] {
    fn from(d: Domain) -> Self {
        [d.a, d.b]
    }
}

/// Functional form of a stationary kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    /// `σ² exp(−|s − t| / L)`.
    Exponential,
    /// `σ² exp(−(s − t)² / (2L²))`.
    SquaredExponential,
    /// `σ²`, a rank-one kernel. The correlation length is ignored.
    Constant,
}

/// An autocorrelation function `R(s, t)` together with the interval it lives on.
///
/// Parameters are checked once in the constructors; evaluation never fails.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "KernelDescriptor", into = "KernelDescriptor")]
pub struct Kernel {
    kind: KernelKind,
    sigma2: f64,
    corr_len: f64,
    domain: Domain,
}

/// Wire form of [`Kernel`]:
/// `{"kind": "exponential", "sigma2": 1.0, "corr_len": 1.0, "domain": [0.0, 1.0]}`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelDescriptor {
    pub kind: KernelKind,
    pub sigma2: f64,
    pub corr_len: f64,
    pub domain: Domain,
}

impl TryFrom<KernelDescriptor> for Kernel {
    type Error = KlError;

    fn try_from(d: KernelDescriptor) -> Result<Self> {
        Kernel::new(d.kind, d.sigma2, d.corr_len, d.domain)
    }
}

impl From<Kernel> for KernelDescriptor {
    fn from(k: Kernel) -> Self {
        KernelDescriptor {
            kind: k.kind,
            sigma2: k.sigma2,
            corr_len: k.corr_len,
            domain: k.domain,
        }
    }
}

impl Kernel {
    pub fn new(kind: KernelKind, sigma2: f64, corr_len: f64, domain: Domain) -> Result<Self> {
        if !(sigma2.is_finite() && sigma2 >= 0.0) {
            return Err(KlError::InvalidParameter(format!(
                "variance must be finite and nonnegative, got {sigma2}"
            )));
        }
        if !(corr_len.is_finite() && corr_len > 0.0) {
            return Err(KlError::InvalidParameter(format!(
                "correlation length must be finite and positive, got {corr_len}"
            )));
        }
        Ok(Self {
            kind,
            sigma2,
            corr_len,
            domain,
        })
    }

    pub fn exponential(sigma2: f64, corr_len: f64, domain: Domain) -> Result<Self> {
        Self::new(KernelKind::Exponential, sigma2, corr_len, domain)
    }

    pub fn squared_exponential(sigma2: f64, corr_len: f64, domain: Domain) -> Result<Self> {
        Self::new(KernelKind::SquaredExponential, sigma2, corr_len, domain)
    }

    pub fn constant(sigma2: f64, domain: Domain) -> Result<Self> {
        Self::new(KernelKind::Constant, sigma2, 1.0, domain)
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn corr_len(&self) -> f64 {
        self.corr_len
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    /// `R(s, t)`. Symmetric in its arguments bit for bit, since only `|s − t|`
    /// enters the formulas.
    #[inline]
    pub fn eval(&self, s: f64, t: f64) -> f64 {
        let r = (s - t).abs();
        match self.kind {
            KernelKind::Exponential => self.sigma2 * (-r / self.corr_len).exp(),
            KernelKind::SquaredExponential => {
                let u = r / self.corr_len;
                self.sigma2 * (-0.5 * u * u).exp()
            }
            KernelKind::Constant => self.sigma2,
        }
    }

    /// `∫_D R(t, t) dt`, the trace of the integral operator.
    pub fn trace(&self) -> f64 {
        self.sigma2 * self.domain.length()
    }
}

/// Free-function form of [`Kernel::eval`].
pub fn eval_kernel(kernel: &Kernel, s: f64, t: f64) -> f64 {
    kernel.eval(s, t)
}

/// `A[i][j] = R(tᵢ, tⱼ)` over the grid nodes, computed on the upper triangle
/// and mirrored so the result is exactly symmetric.
pub fn kernel_matrix(kernel: &Kernel, grid: &Grid) -> Matrix {
    let nodes = grid.nodes();
    let n = nodes.len();
    let mut a = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = kernel.eval(nodes[i], nodes[j]);
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::Rule;
    use crate::spectral::jacobi_eigen_symmetric;
    use proptest::prelude::*;

    fn unit() -> Domain {
        Domain::new(0.0, 1.0).unwrap()
    }

    #[test]
    fn exponential_values() {
        let k = Kernel::exponential(1.0, 1.0, unit()).unwrap();
        assert_eq!(k.eval(0.3, 0.3), 1.0);
        assert_eq!(k.eval(0.0, 0.0), 1.0);
        assert!((k.eval(0.0, 1.0) - 0.367_879_441_171_442_3).abs() < 1e-15);
    }

    #[test]
    fn squared_exponential_values() {
        let k = Kernel::squared_exponential(2.0, 0.5, unit()).unwrap();
        assert_eq!(k.eval(0.7, 0.7), 2.0);
        // (s - t) = L gives exp(-1/2).
        assert!((k.eval(0.0, 0.5) - 2.0 * (-0.5f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(Kernel::exponential(-1.0, 1.0, unit()).is_err());
        assert!(Kernel::exponential(1.0, 0.0, unit()).is_err());
        assert!(Kernel::exponential(1.0, -2.0, unit()).is_err());
        assert!(Kernel::exponential(f64::NAN, 1.0, unit()).is_err());
        assert!(Kernel::exponential(0.0, 1.0, unit()).is_ok());
        assert!(Domain::new(1.0, 1.0).is_err());
        assert!(Domain::new(2.0, 1.0).is_err());
    }

    #[test]
    fn two_node_matrix() {
        let k = Kernel::exponential(1.0, 1.0, unit()).unwrap();
        let g = Grid::new(unit(), 2, Rule::Trapezoid).unwrap();
        let a = kernel_matrix(&k, &g);
        let e = (-1.0f64).exp();
        assert_eq!(a[(0, 0)], 1.0);
        assert_eq!(a[(1, 1)], 1.0);
        assert!((a[(0, 1)] - e).abs() < 1e-16);
        assert_eq!(a[(0, 1)], a[(1, 0)]);
    }

    #[test]
    fn matrix_diagonal_is_variance() {
        let k = Kernel::exponential(1.0, 1.0, unit()).unwrap();
        let g = Grid::new(unit(), 101, Rule::Trapezoid).unwrap();
        let a = kernel_matrix(&k, &g);
        assert!((0..101).all(|i| a[(i, i)] == 1.0));
    }

    #[test]
    fn descriptor_round_trip() {
        let json =
            r#"{"kind": "exponential", "sigma2": 1.0, "corr_len": 1.0, "domain": [0.0, 1.0]}"#;
        let k: Kernel = serde_json::from_str(json).unwrap();
        assert_eq!(k, Kernel::exponential(1.0, 1.0, unit()).unwrap());
        let back: Kernel = serde_json::from_str(&serde_json::to_string(&k).unwrap()).unwrap();
        assert_eq!(back, k);

        let bad =
            r#"{"kind": "exponential", "sigma2": 1.0, "corr_len": 0.0, "domain": [0.0, 1.0]}"#;
        assert!(serde_json::from_str::<Kernel>(bad).is_err());
        let bad =
            r#"{"kind": "exponential", "sigma2": 1.0, "corr_len": 1.0, "domain": [1.0, 0.0]}"#;
        assert!(serde_json::from_str::<Kernel>(bad).is_err());
        let extra = r#"{"kind": "exponential", "sigma2": 1.0, "corr_len": 1.0, "domain": [0.0, 1.0], "x": 1}"#;
        assert!(serde_json::from_str::<Kernel>(extra).is_err());
    }

    fn any_kernel() -> impl Strategy<Value = Kernel> {
        (
            prop_oneof![
                Just(KernelKind::Exponential),
                Just(KernelKind::SquaredExponential)
            ],
            0.0f64..10.0,
            0.01f64..5.0,
        )
            .prop_map(|(kind, s2, l)| Kernel::new(kind, s2, l, unit()).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn symmetric_and_bounded(k in any_kernel(), s in 0.0f64..1.0, t in 0.0f64..1.0) {
            let v = k.eval(s, t);
            prop_assert_eq!(v, k.eval(t, s));
            prop_assert!(v >= 0.0 && v <= k.sigma2());
        }

        #[test]
        fn diagonal_is_variance(k in any_kernel(), t in 0.0f64..1.0) {
            prop_assert_eq!(k.eval(t, t), k.sigma2());
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn kernel_matrix_is_psd(
            k in any_kernel(),
            mut pts in proptest::collection::vec(0.0f64..1.0, 2..50),
        ) {
            pts.sort_by(f64::total_cmp);
            let n = pts.len();
            let mut a = Matrix::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    a[(i, j)] = k.eval(pts[i], pts[j]);
                }
            }
            let eig = jacobi_eigen_symmetric(&a).unwrap();
            let floor = -1e-10 * k.sigma2().max(f64::MIN_POSITIVE);
            prop_assert!(eig.values.iter().all(|&l| l >= floor), "{:?}", eig.values);
        }
    }
}
