//! Continuation in the coupling strength.
//!
//! Replacing `G -> lambda G` keeps a model integrable for every `lambda`, with
//! `C(lambda) = lambda C` and `K_i(lambda) = |B_i|^2 + lambda^2 sum (G_ik^a)^2`.
//! At `lambda = 0` the equations decouple into `r_i^2 = |B_i|^2`, whose `2^N`
//! roots `r_i = s_i |B_i|` seed one path each.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    default_dedupe_tol, dedupe, max_distance, newton_solve, residual_and_jacobian,
    EigenvalueTuple, NewtonOptions, SolutionSet,
};
use crate::error::{Error, Result};
use crate::model::ModelSpec;
use crate::quad_relations::{derive_coefficients, QuadraticSystem};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomotopyOptions {
    pub newton: NewtonOptions,
    /// Tolerance for the integrability scan and coefficient derivation.
    pub integrability_tol: f64,
    pub initial_step: f64,
    pub max_step: f64,
    pub min_step: f64,
    /// Newton iterations allowed per corrector call.
    pub corrector_iterations: usize,
    /// Fields must exceed `startup_threshold * (1 + max |G|)`.
    pub startup_threshold: f64,
    /// Defaults to `1e-7 (1 + max_i sqrt K_i)`.
    pub dedupe_tol: Option<f64>,
    /// Re-tracking rounds, each with a 4x smaller step cap, for branches that
    /// failed or landed on an already-found tuple.
    pub refinements: usize,
}

impl Default for HomotopyOptions {
    fn default() -> Self {
        Self {
            newton: NewtonOptions::default(),
            integrability_tol: 1e-10,
            initial_step: 0.02,
            max_step: 0.1,
            min_step: 1e-6,
            corrector_iterations: 8,
            startup_threshold: 1e-8,
            dedupe_tol: None,
            refinements: 3,
        }
    }
}

/// A branch that could not be tracked to `lambda = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathFailure {
    pub branch_tag: Vec<i8>,
    pub lambda: f64,
    pub reason: String,
}

/// The `lambda`-family of quadratic systems of one model.
#[derive(Debug, Clone)]
pub struct CouplingHomotopy {
    target: QuadraticSystem,
    field_sq: Vec<f64>,
    coupling_sq: Vec<f64>,
}

impl CouplingHomotopy {
    pub fn new(spec: &ModelSpec, tol: f64) -> Result<Self> {
        let target = derive_coefficients(spec, tol)?;
        let n = spec.n_spins();
        Ok(Self {
            target,
            field_sq: (0..n).map(|i| spec.field_norm_sq(i)).collect(),
            coupling_sq: (0..n).map(|i| spec.coupling_norm_sq(i)).collect(),
        })
    }

    pub fn n_spins(&self) -> usize {
        self.field_sq.len()
    }

    /// The system at `lambda = 1`.
    pub fn target(&self) -> &QuadraticSystem {
        &self.target
    }

    pub fn at(&self, lambda: f64) -> QuadraticSystem {
        let n = self.n_spins();
        let c = (0..n)
            .map(|i| (0..n).map(|j| lambda * self.target.c(i, j)).collect())
            .collect();
        let k = (0..n)
            .map(|i| self.field_sq[i] + lambda * lambda * self.coupling_sq[i])
            .collect();
        QuadraticSystem::new(c, k).expect("scaled system inherits validity")
    }

    /// `dr/dlambda` from `J dr = -dF/dlambda` at a point on a path.
    fn tangent(&self, system: &QuadraticSystem, r: &[f64], lambda: f64) -> Option<Vec<f64>> {
        let n = self.n_spins();
        let (_, jac) = residual_and_jacobian(system, r);
        let rhs = nalgebra::DVector::from_fn(n, |i, _| {
            let linear: f64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| self.target.c(i, j) * r[j])
                .sum();
            linear + 2.0 * lambda * self.coupling_sq[i]
        });
        jac.lu().solve(&rhs).map(|v| v.iter().copied().collect())
    }

    /// Start point `s_i |B_i|` of branch `index`; bit `N-1-i` set means `s_i = -1`.
    pub fn start(&self, index: usize) -> (Vec<f64>, Vec<i8>) {
        let n = self.n_spins();
        let signs: Vec<i8> = (0..n)
            .map(|i| if index >> (n - 1 - i) & 1 == 0 { 1 } else { -1 })
            .collect();
        let r = signs
            .iter()
            .zip(&self.field_sq)
            .map(|(&s, b2)| f64::from(s) * b2.sqrt())
            .collect();
        (r, signs)
    }

    fn track(
        &self,
        index: usize,
        opts: &HomotopyOptions,
        max_step: f64,
    ) -> std::result::Result<EigenvalueTuple, PathFailure> {
        let (mut r, signs) = self.start(index);
        let fail = |lambda: f64, reason: String| PathFailure {
            branch_tag: signs.clone(),
            lambda,
            reason,
        };
        let corrector = NewtonOptions {
            max_iter: opts.corrector_iterations,
            ..opts.newton
        };

        let mut lambda = 0.0f64;
        let mut step = opts.initial_step.min(max_step);
        let mut streak = 0;
        let mut system = self.at(0.0);
        while lambda < 1.0 {
            let h = step.min(1.0 - lambda);
            let Some(dr) = self.tangent(&system, &r, lambda) else {
                return Err(fail(lambda, "singular Jacobian on path".into()));
            };
            let predicted: Vec<f64> = r.iter().zip(&dr).map(|(x, d)| x + h * d).collect();
            let next_lambda = if h == 1.0 - lambda { 1.0 } else { lambda + h };
            let next_system = self.at(next_lambda);

            let speed = dr.iter().fold(0.0f64, |m, d| m.max(d.abs()));
            let scale = r.iter().fold(1.0f64, |m, x| m.max(x.abs()));
            let allowed = (0.5 * h * speed).max(1e-6 * scale);
            let accepted = newton_solve(&next_system, &predicted, &corrector)
                .ok()
                .filter(|t| max_distance(&t.r, &predicted) <= allowed);

            match accepted {
                Some(t) => {
                    r = t.r;
                    lambda = next_lambda;
                    system = next_system;
                    streak += 1;
                    if streak >= 2 {
                        step = (2.0 * step).min(max_step);
                        streak = 0;
                    }
                }
                None => {
                    step *= 0.5;
                    streak = 0;
                    if step < opts.min_step {
                        return Err(fail(lambda, format!("step fell below {:e}", opts.min_step)));
                    }
                }
            }
        }

        let mut tuple = newton_solve(&self.target, &r, &opts.newton)
            .map_err(|e| fail(1.0, format!("final polish failed: {e}")))?;
        tuple.branch_tag = Some(signs);
        Ok(tuple)
    }
}

/// All joint eigenvalue tuples by tracking the `2^N` decoupled-limit roots.
pub fn solve_all_homotopy(spec: &ModelSpec, opts: &HomotopyOptions) -> Result<SolutionSet> {
    let n = spec.n_spins();
    let threshold = opts.startup_threshold * (1.0 + spec.max_abs_coupling());
    for i in 0..n {
        let magnitude = spec.field_norm_sq(i).sqrt();
        if magnitude <= threshold {
            return Err(Error::StartupDegenerate {
                spin: i,
                magnitude,
                threshold,
            });
        }
    }
    let family = CouplingHomotopy::new(spec, opts.integrability_tol)?;
    let tol = opts
        .dedupe_tol
        .unwrap_or_else(|| default_dedupe_tol(family.target()));
    let branches = 1usize << n;

    let mut outcomes: Vec<std::result::Result<EigenvalueTuple, PathFailure>> = (0..branches)
        .into_par_iter()
        .map(|b| family.track(b, opts, opts.max_step))
        .collect();

    let mut max_step = opts.max_step;
    for _ in 0..opts.refinements {
        let suspect = suspect_branches(&outcomes, tol);
        if suspect.is_empty() {
            break;
        }
        max_step /= 4.0;
        let retracked: Vec<_> = suspect
            .par_iter()
            .map(|&b| (b, family.track(b, opts, max_step)))
            .collect();
        for (b, outcome) in retracked {
            outcomes[b] = outcome;
        }
    }

    let mut tuples = Vec::with_capacity(branches);
    let mut failures = Vec::new();
    for outcome in outcomes {
        match outcome {
            Ok(t) => tuples.push(t),
            Err(f) => failures.push(f),
        }
    }
    Ok(SolutionSet {
        tuples: dedupe(tuples, tol),
        dedupe_tol: tol,
        expected: branches,
        failed_paths: failures,
    })
}

/// Failed branches plus every member of a group of colliding endpoints.
fn suspect_branches(
    outcomes: &[std::result::Result<EigenvalueTuple, PathFailure>],
    tol: f64,
) -> Vec<usize> {
    let mut suspect = Vec::new();
    for (b, outcome) in outcomes.iter().enumerate() {
        match outcome {
            Err(_) => suspect.push(b),
            Ok(t) => {
                let collides = outcomes.iter().enumerate().any(|(other, o)| {
                    other != b && o.as_ref().is_ok_and(|u| max_distance(&u.r, &t.r) <= tol)
                });
                if collides {
                    suspect.push(b);
                }
            }
        }
    }
    suspect
}
