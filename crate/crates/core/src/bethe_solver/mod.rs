//! Real solutions of the quadratic Bethe equations
//!
//! ```text
//! F_i(r) = r_i^2 - sum_{j != i} C_ij r_j - K_i = 0,   i = 1..N
//! ```
//!
//! Each solution is a joint eigenvalue tuple of the conserved charges. The
//! primary solver tracks all `2^N` branches from the decoupled limit;
//! [`solve_all_multistart`] is a sampling fallback.

mod homotopy;
mod multistart;
mod newton;

pub use homotopy::{solve_all_homotopy, CouplingHomotopy, HomotopyOptions, PathFailure};
pub use multistart::{default_box, solve_all_multistart, MultistartOptions};
pub use newton::{newton_solve, FailureCause, NewtonOptions, NonConvergence};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::quad_relations::QuadraticSystem;

/// `F(r)` and its analytic Jacobian `J_ii = 2 r_i`, `J_ij = -C_ij`.
///
/// # Panics
///
/// If `r.len()` differs from the system size.
pub fn residual_and_jacobian(qsys: &QuadraticSystem, r: &[f64]) -> (DVector<f64>, DMatrix<f64>) {
    let n = qsys.n_spins();
    assert_eq!(r.len(), n, "tuple length must match the system size");
    let f = residual(qsys, r);
    let j = DMatrix::from_fn(n, n, |row, col| {
        if row == col {
            2.0 * r[row]
        } else {
            -qsys.c(row, col)
        }
    });
    (f, j)
}

pub fn residual(qsys: &QuadraticSystem, r: &[f64]) -> DVector<f64> {
    let n = qsys.n_spins();
    DVector::from_fn(n, |i, _| {
        let linear: f64 = (0..n).filter(|&j| j != i).map(|j| qsys.c(i, j) * r[j]).sum();
        r[i] * r[i] - linear - qsys.k(i)
    })
}

/// One joint eigenvalue assignment `(r_1, ..., r_N)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenvalueTuple {
    pub r: Vec<f64>,
    pub residual_norm: f64,
    /// Sign vector of the decoupled-limit start, for homotopy solutions.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub branch_tag: Option<Vec<i8>>,
}

/// Max-norm distance between two tuples.
pub fn max_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Deduplicated solutions of an `N`-spin system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionSet {
    pub tuples: Vec<EigenvalueTuple>,
    pub dedupe_tol: f64,
    /// `2^N`.
    pub expected: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub failed_paths: Vec<PathFailure>,
}

impl SolutionSet {
    pub fn found(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_complete(&self) -> bool {
        self.found() == self.expected
    }

    pub fn sum_rules(&self, qsys: &QuadraticSystem) -> SumRuleReport {
        sum_rules(&self.tuples, qsys)
    }
}

/// Greedy max-norm clustering; each cluster keeps its lowest-residual member.
///
/// Survivors are returned in lexicographic order of `r`.
pub fn dedupe(tuples: Vec<EigenvalueTuple>, tol: f64) -> Vec<EigenvalueTuple> {
    let mut sorted = tuples;
    sorted.sort_by(|a, b| a.residual_norm.total_cmp(&b.residual_norm));
    let mut kept: Vec<EigenvalueTuple> = Vec::new();
    for t in sorted {
        if kept.iter().all(|k| max_distance(&k.r, &t.r) > tol) {
            kept.push(t);
        }
    }
    kept.sort_by(|a, b| lexicographic(&a.r, &b.r));
    kept
}

/// [`dedupe`] wrapped into a [`SolutionSet`] for an `n_spins` system.
pub fn dedupe_set(tuples: Vec<EigenvalueTuple>, tol: f64, n_spins: usize) -> SolutionSet {
    SolutionSet {
        tuples: dedupe(tuples, tol),
        dedupe_tol: tol,
        expected: 1usize << n_spins,
        failed_paths: Vec::new(),
    }
}

pub(crate) fn lexicographic(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(std::cmp::Ordering::Equal)
}

/// Default dedupe tolerance `1e-7 (1 + max_i sqrt K_i)`.
pub fn default_dedupe_tol(qsys: &QuadraticSystem) -> f64 {
    let root = qsys.constants().iter().fold(0.0f64, |m, k| m.max(k.sqrt()));
    1e-7 * (1.0 + root)
}

/// Trace identities over a full spectrum: `sum r_i = 0`, `sum r_i^2 = 2^N K_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SumRuleReport {
    /// `|sum_t r_i| / max(1, sum_t |r_i|)`, worst over `i`.
    pub max_first_moment_residual: f64,
    /// `|sum_t r_i^2 - 2^N K_i| / max(1, 2^N K_i)`, worst over `i`.
    pub max_second_moment_residual: f64,
}

impl SumRuleReport {
    pub fn passed(&self, tol: f64) -> bool {
        self.max_first_moment_residual <= tol && self.max_second_moment_residual <= tol
    }
}

pub fn sum_rules(tuples: &[EigenvalueTuple], qsys: &QuadraticSystem) -> SumRuleReport {
    let n = qsys.n_spins();
    let states = (1usize << n) as f64;
    let mut first = 0.0f64;
    let mut second = 0.0f64;
    for i in 0..n {
        let sum: f64 = tuples.iter().map(|t| t.r[i]).sum();
        let abs: f64 = tuples.iter().map(|t| t.r[i].abs()).sum();
        let sq: f64 = tuples.iter().map(|t| t.r[i] * t.r[i]).sum();
        first = first.max(sum.abs() / abs.max(1.0));
        let expected = states * qsys.k(i);
        second = second.max((sq - expected).abs() / expected.max(1.0));
    }
    SumRuleReport {
        max_first_moment_residual: first,
        max_second_moment_residual: second,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn xxx2() -> QuadraticSystem {
        QuadraticSystem::new(vec![vec![0.0, -1.0], vec![1.0, 0.0]], vec![1.75, 1.75]).unwrap()
    }

    fn tuple(r: &[f64], residual: f64) -> EigenvalueTuple {
        EigenvalueTuple {
            r: r.to_vec(),
            residual_norm: residual,
            branch_tag: None,
        }
    }

    /// Central differences, independent of the analytic Jacobian.
    fn fd_jacobian(qsys: &QuadraticSystem, r: &[f64], h: f64) -> DMatrix<f64> {
        let n = r.len();
        let mut j = DMatrix::zeros(n, n);
        for col in 0..n {
            let mut plus = r.to_vec();
            let mut minus = r.to_vec();
            plus[col] += h;
            minus[col] -= h;
            let df = (residual(qsys, &plus) - residual(qsys, &minus)) / (2.0 * h);
            j.set_column(col, &df);
        }
        j
    }

    #[test]
    fn scalar_system_at_root() {
        let q = QuadraticSystem::new(vec![vec![0.0]], vec![2.25]).unwrap();
        let (f, j) = residual_and_jacobian(&q, &[1.5]);
        assert_eq!(f[0], 0.0);
        assert_eq!(j[(0, 0)], 3.0);
    }

    #[test]
    fn two_spin_values() {
        // F_1 = r_1^2 + r_2 - 7/4, F_2 = r_2^2 - r_1 - 7/4 at (3/2, -1/2).
        let (f, j) = residual_and_jacobian(&xxx2(), &[1.5, -0.5]);
        assert_eq!(f.as_slice(), &[0.0, -3.0]);
        assert_eq!(j, DMatrix::from_row_slice(2, 2, &[3.0, 1.0, -1.0, -1.0]));
        let fd = fd_jacobian(&xxx2(), &[1.5, -0.5], 1e-6);
        assert!((fd - j).abs().max() <= 1e-6);
    }

    #[test]
    #[should_panic(expected = "tuple length")]
    fn length_mismatch_panics() {
        residual_and_jacobian(&xxx2(), &[1.0]);
    }

    #[test]
    fn dedupe_behaviour() {
        let tol = 1e-6;
        let kept = dedupe(vec![tuple(&[1.0, 2.0], 0.0), tuple(&[1.0, 2.0], 0.0)], tol);
        assert_eq!(kept.len(), 1);

        let kept = dedupe(vec![tuple(&[1.0, 2.0], 0.0), tuple(&[1.0 + 10.0 * tol, 2.0], 0.0)], tol);
        assert_eq!(kept.len(), 2);

        let noisy = vec![
            tuple(&[1.0 + 0.1 * tol, 2.0], 3e-13),
            tuple(&[1.0, 2.0 - 0.1 * tol], 1e-13),
            tuple(&[1.0 - 0.05 * tol, 2.0 + 0.1 * tol], 2e-13),
        ];
        let kept = dedupe(noisy, tol);
        assert_eq!(kept.len(), 1);
        assert_eq!(kept[0].residual_norm, 1e-13);
    }

    #[test]
    fn sum_rules_on_decoupled_spectrum() {
        let q = QuadraticSystem::new(vec![vec![0.0, 0.0], vec![0.0, 0.0]], vec![1.0, 4.0]).unwrap();
        let all: Vec<_> = [(1.0, 2.0), (1.0, -2.0), (-1.0, 2.0), (-1.0, -2.0)]
            .iter()
            .map(|&(a, b)| tuple(&[a, b], 0.0))
            .collect();
        let report = sum_rules(&all, &q);
        assert_eq!(report.max_first_moment_residual, 0.0);
        assert_eq!(report.max_second_moment_residual, 0.0);
    }

    proptest! {
        #[test]
        fn analytic_jacobian_matches_finite_differences(
            c in prop::collection::vec(-3.0f64..3.0, 16),
            k in prop::collection::vec(0.0f64..5.0, 4),
            r in prop::collection::vec(-4.0f64..4.0, 4),
        ) {
            let mut cm = vec![vec![0.0; 4]; 4];
            for i in 0..4 {
                for j in 0..4 {
                    if i != j {
                        cm[i][j] = c[i * 4 + j];
                    }
                }
            }
            let q = QuadraticSystem::new(cm, k).unwrap();
            let (_, j) = residual_and_jacobian(&q, &r);
            let fd = fd_jacobian(&q, &r, 1e-6);
            for (a, b) in j.iter().zip(fd.iter()) {
                prop_assert!((a - b).abs() <= 1e-6 * a.abs().max(1.0));
            }
        }

        #[test]
        fn dedupe_survivors_are_separated(
            points in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0, 0.0f64..1.0), 1..40),
        ) {
            let tol = 0.2;
            let tuples = points.iter().map(|&(a, b, res)| tuple(&[a, b], res)).collect();
            let kept = dedupe(tuples, tol);
            for (p, a) in kept.iter().enumerate() {
                for b in &kept[p + 1..] {
                    prop_assert!(max_distance(&a.r, &b.r) > tol);
                }
            }
            // every input is within tol of some survivor
            for &(a, b, _) in &points {
                prop_assert!(kept.iter().any(|k| max_distance(&k.r, &[a, b]) <= tol));
            }
        }
    }
}
