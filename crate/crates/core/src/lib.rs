//! Karhunen–Loève expansions of centered, mean-square continuous random
//! processes on a bounded interval.
//!
//! The crate is organised bottom-up:
//!
//! * [`kernels`]: autocorrelation functions `R(s, t)` on an interval.
//! * [`quadrature`]: grids of nodes and weights standing in for `L²(D)`.
//! * [`spectral`]: eigenpairs of the autocorrelation integral operator, by
//!   Nyström discretization or, for the exponential kernel, in closed form.
//! * [`mercer`]: truncated reconstructions `Σ λᵢ eᵢ(s) eᵢ(t)` and their errors.
//! * [`simulate`]: seeded sampling of truncated expansions of a Gaussian field
//!   and the statistical checks that go with it.
//!
//! ```
//! use klfield::{Domain, Kernel, Grid, Rule, spectral};
//!
//! let domain = Domain::new(0.0, 1.0).unwrap();
//! let kernel = Kernel::exponential(1.0, 1.0, domain).unwrap();
//! let grid = Grid::new(domain, 200, Rule::Trapezoid).unwrap();
//! let spectrum = spectral::nystrom_spectrum(&kernel, &grid, 10).unwrap();
//! assert!((spectrum.eigenvalues()[0] - 0.7388).abs() < 1e-3);
//! ```

// `!(x <= tol)` is how NaN gets rejected; index loops mirror the matrix algebra.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod kernels;
pub mod linalg;
pub mod mercer;
pub mod quadrature;
pub mod simulate;
pub mod spectral;

pub use error::{KlError, Result};
pub use kernels::{Domain, Kernel, KernelKind};
pub use quadrature::{Grid, Rule};
pub use spectral::{Method, Spectrum};
