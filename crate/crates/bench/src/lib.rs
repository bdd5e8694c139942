//! Shared fixtures for the criterion benchmarks.

use rgquad_core::catalog::{xxx_rational, xxz_pip};
use rgquad_core::ModelSpec;

/// Rational model on levels `0, 1.1, 2.2, ...` with unit field.
pub fn xxx(n: usize) -> ModelSpec {
    let eps: Vec<f64> = (0..n).map(|i| 1.1 * i as f64).collect();
    xxx_rational(&eps, 1.0).expect("distinct levels")
}

/// p+ip model on levels `0.5, 1.2, 1.9, ...`.
pub fn pip(n: usize) -> ModelSpec {
    let eps: Vec<f64> = (0..n).map(|i| 0.5 + 0.7 * i as f64).collect();
    xxz_pip(&eps, 0.6, 0.3).expect("distinct positive levels")
}
