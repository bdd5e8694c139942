use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{residual, residual_and_jacobian, EigenvalueTuple};
use crate::quad_relations::QuadraticSystem;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NewtonOptions {
    pub max_iter: usize,
    /// Convergence threshold on `||F||_2`, relative to
    /// [`QuadraticSystem::residual_scale`].
    pub tol: f64,
    pub max_halvings: usize,
    /// Jacobians with a larger 2-norm condition number are treated as singular.
    pub max_condition: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            max_iter: 100,
            tol: 1e-12,
            max_halvings: 30,
            max_condition: 1e14,
        }
    }
}

impl NewtonOptions {
    /// Absolute threshold on `||F||_2` for `qsys`.
    pub fn effective_tol(&self, qsys: &QuadraticSystem) -> f64 {
        self.tol * qsys.residual_scale()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureCause {
    SingularJacobian,
    LineSearch,
    MaxIterations,
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("Newton did not converge ({cause:?}); best residual {residual_norm:e}")]
pub struct NonConvergence {
    pub cause: FailureCause,
    pub best: Vec<f64>,
    pub residual_norm: f64,
    pub iterations: usize,
}

/// Damped Newton iteration with analytic Jacobian and step halving.
pub fn newton_solve(
    qsys: &QuadraticSystem,
    r0: &[f64],
    opts: &NewtonOptions,
) -> Result<EigenvalueTuple, NonConvergence> {
    let tol = opts.effective_tol(qsys);
    let mut r = r0.to_vec();
    let (mut f, mut jac) = residual_and_jacobian(qsys, &r);
    let mut norm = f.norm();

    let fail = |cause, r: Vec<f64>, norm, iterations| NonConvergence {
        cause,
        best: r,
        residual_norm: norm,
        iterations,
    };

    for iter in 0..=opts.max_iter {
        if norm <= tol {
            return Ok(EigenvalueTuple {
                r,
                residual_norm: norm,
                branch_tag: None,
            });
        }
        if iter == opts.max_iter {
            break;
        }

        let svd = jac.clone().svd(true, true);
        let smax = svd.singular_values.max();
        let smin = svd.singular_values.min();
        if smin == 0.0 || smax / smin > opts.max_condition {
            return Err(fail(FailureCause::SingularJacobian, r, norm, iter));
        }
        let step = match svd.solve(&(-&f), 0.0) {
            Ok(step) => step,
            Err(_) => return Err(fail(FailureCause::SingularJacobian, r, norm, iter)),
        };

        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..=opts.max_halvings {
            let trial: Vec<f64> = r.iter().zip(step.iter()).map(|(x, d)| x + t * d).collect();
            let trial_norm = residual(qsys, &trial).norm();
            if trial_norm < norm {
                accepted = Some((trial, trial_norm));
                break;
            }
            t *= 0.5;
        }
        let Some((next, _)) = accepted else {
            return Err(fail(FailureCause::LineSearch, r, norm, iter));
        };
        r = next;
        (f, jac) = residual_and_jacobian(qsys, &r);
        norm = f.norm();
    }
    Err(fail(FailureCause::MaxIterations, r, norm, opts.max_iter))
}
