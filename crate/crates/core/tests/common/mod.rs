#![allow(dead_code)]

use klfield::{Domain, Grid, Kernel, Rule};

pub fn unit() -> Domain {
    Domain::new(0.0, 1.0).unwrap()
}

/// σ² = 1, L = 1 exponential kernel on [0, 1].
pub fn reference_kernel() -> Kernel {
    Kernel::exponential(1.0, 1.0, unit()).unwrap()
}

pub fn trapezoid(n: usize) -> Grid {
    Grid::new(unit(), n, Rule::Trapezoid).unwrap()
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}
