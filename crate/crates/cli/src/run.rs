//! The `check`, `derive`, `solve` and `verify` pipelines.

use std::collections::BTreeMap;
use std::time::Instant;

use rgquad_core::bethe_solver::{
    solve_all_homotopy, solve_all_multistart, HomotopyOptions, MultistartOptions, NewtonOptions,
    SolutionSet, SumRuleReport,
};
use rgquad_core::ed_oracle::{joint_spectrum, match_spectra, MatchReport, OracleOptions, SpectrumTable};
use rgquad_core::model::{check_commutators_numerical, check_integrability_algebraic, IntegrabilityReport, ModelSpec};
use rgquad_core::quad_relations::{
    check_coefficient_consistency, derive_coefficients, verify_operator_identity, ConsistencyReport,
    OperatorIdentityReport, QuadraticSystem,
};
use rgquad_core::Error;
use serde::Serialize;

use crate::config::{RunConfig, SolverMethod};
use crate::CliError;

/// Spectral sum rules are checked to this relative tolerance.
pub const SUM_RULE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Certify integrability of the model.
    Check,
    /// Derive the quadratic relations and check them.
    Derive,
    /// Solve the quadratic Bethe equations for the full spectrum.
    Solve,
    /// Solve, then compare with exact diagonalization.
    Verify,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub command: Command,
    pub passed: bool,
    /// Why the run failed, when it did.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub failures: Vec<String>,
    pub config: RunConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub integrability: Option<IntegrabilityReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quadratic_system: Option<QuadraticSystem>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub consistency: Option<ConsistencyReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub operator_identity: Option<OperatorIdentityReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solver_method: Option<SolverMethod>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solutions: Option<SolutionSet>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sum_rules: Option<SumRuleReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<SpectrumTable>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matching: Option<MatchReport>,
    /// Seconds per stage.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings: Option<BTreeMap<String, f64>>,
}

impl RunReport {
    fn new(command: Command, config: RunConfig) -> Self {
        Self {
            command,
            passed: true,
            failures: Vec::new(),
            timings: config.output.timings.then(BTreeMap::new),
            config,
            integrability: None,
            quadratic_system: None,
            consistency: None,
            operator_identity: None,
            solver_method: None,
            solutions: None,
            sum_rules: None,
            spectrum: None,
            matching: None,
        }
    }

    fn fail(&mut self, reason: impl Into<String>) {
        self.passed = false;
        self.failures.push(reason.into());
    }

    fn timed<T>(&mut self, stage: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        if let Some(t) = &mut self.timings {
            t.insert(stage.to_string(), start.elapsed().as_secs_f64());
        }
        out
    }

    /// 0 on success, 1 on a domain failure.
    pub fn exit_code(&self) -> u8 {
        if self.passed {
            0
        } else {
            1
        }
    }
}

/// Runs `command` on an already resolved config.
pub fn execute(command: Command, config: RunConfig, allow_incomplete: bool) -> Result<RunReport, CliError> {
    let spec = config.build_model()?;
    let mut report = RunReport::new(command, config);
    match command {
        Command::Check => check(&spec, &mut report)?,
        Command::Derive => {
            derive(&spec, &mut report, true)?;
        }
        Command::Solve => solve(&spec, &mut report, allow_incomplete)?,
        Command::Verify => {
            if !report.config.oracle.enabled {
                return Err(CliError::Usage("verify needs oracle.enabled = true".into()));
            }
            solve(&spec, &mut report, allow_incomplete)?;
            verify(&spec, &mut report)?;
        }
    }
    Ok(report)
}

fn check(spec: &ModelSpec, report: &mut RunReport) -> Result<(), CliError> {
    let tol = report.config.tolerances.integrability;
    let cap = report.config.cap();
    let integrability = if spec.n_spins() <= cap {
        report.timed("commutators", || check_commutators_numerical(spec, tol, cap))?
    } else {
        report.timed("algebraic", || check_integrability_algebraic(spec, tol))
    };
    if !integrability.passed() {
        report.fail(format!(
            "integrability check failed with {} violation(s)",
            integrability.violations.len()
        ));
    }
    report.integrability = Some(integrability);
    Ok(())
}

/// Derives the system; `None` (with the report marked failed) when the model
/// admits no quadratic relations.
fn derive(spec: &ModelSpec, report: &mut RunReport, operator_check: bool) -> Result<Option<QuadraticSystem>, CliError> {
    let tol = report.config.tolerances.integrability;
    let integrability = report.timed("algebraic", || check_integrability_algebraic(spec, tol));
    report.integrability = Some(integrability);

    let qsys = match report.timed("derive", || derive_coefficients(spec, tol)) {
        Ok(q) => q,
        Err(
            e @ (Error::IntegrabilityViolation { .. }
            | Error::DegenerateCoupling { .. }
            | Error::InternalInconsistency { .. }),
        ) => {
            report.fail(e.to_string());
            return Ok(None);
        }
        Err(e) => return Err(e.into()),
    };

    let consistency = report.timed("consistency", || check_coefficient_consistency(spec, &qsys, tol));
    if !consistency.passed {
        report.fail("coefficient routes disagree");
    }
    report.consistency = Some(consistency);

    let cap = report.config.cap();
    if operator_check && spec.n_spins() <= cap {
        let identity = report.timed("operator_identity", || verify_operator_identity(spec, &qsys, tol, cap))?;
        if !identity.passed {
            report.fail("operator identity residual above tolerance");
        }
        report.operator_identity = Some(identity);
    }
    report.quadratic_system = Some(qsys.clone());
    Ok(Some(qsys))
}

fn solve(spec: &ModelSpec, report: &mut RunReport, allow_incomplete: bool) -> Result<(), CliError> {
    let Some(qsys) = derive(spec, report, false)? else {
        return Ok(());
    };
    let config = &report.config;
    let newton = NewtonOptions {
        max_iter: config.solver.max_iter,
        tol: config.tolerances.solver,
        ..NewtonOptions::default()
    };
    let homotopy = HomotopyOptions {
        newton,
        integrability_tol: config.tolerances.integrability,
        dedupe_tol: config.tolerances.dedupe,
        ..HomotopyOptions::default()
    };
    let multistart = MultistartOptions {
        newton,
        sample_count: config.solver.sample_count,
        seed: config.seed(),
        sampling_box: None,
        dedupe_tol: config.tolerances.dedupe,
    };

    let (method, set) = match config.solver.method {
        SolverMethod::Homotopy => (
            SolverMethod::Homotopy,
            report.timed("solve", || solve_all_homotopy(spec, &homotopy))?,
        ),
        SolverMethod::Multistart => (
            SolverMethod::Multistart,
            report.timed("solve", || solve_all_multistart(&qsys, &multistart)),
        ),
        SolverMethod::Auto => match report.timed("solve", || solve_all_homotopy(spec, &homotopy)) {
            Ok(set) => (SolverMethod::Homotopy, set),
            Err(Error::StartupDegenerate { .. }) => (
                SolverMethod::Multistart,
                report.timed("solve", || solve_all_multistart(&qsys, &multistart)),
            ),
            Err(e) => return Err(e.into()),
        },
    };

    if !set.is_complete() && !allow_incomplete {
        report.fail(format!("found {} of {} tuples", set.found(), set.expected));
    }
    if set.is_complete() {
        let rules = set.sum_rules(&qsys);
        if !rules.passed(SUM_RULE_TOL) {
            report.fail("spectral sum rules violated");
        }
        report.sum_rules = Some(rules);
    }
    report.solver_method = Some(method);
    report.solutions = Some(set);
    Ok(())
}

fn verify(spec: &ModelSpec, report: &mut RunReport) -> Result<(), CliError> {
    let Some(solutions) = report.solutions.clone() else {
        return Ok(());
    };
    let opts = OracleOptions {
        seed: report.config.seed(),
        max_spins: report.config.cap(),
        ..OracleOptions::default()
    };
    let spectrum = match report.timed("oracle", || joint_spectrum(spec, &opts)) {
        Ok(s) => s,
        Err(e @ (Error::NonCommutingFamily { .. } | Error::OracleResidual { .. })) => {
            report.fail(e.to_string());
            return Ok(());
        }
        Err(e) => return Err(e.into()),
    };
    let matching = match_spectra(&solutions, &spectrum, report.config.tolerances.oracle);
    if !matching.is_perfect() {
        report.fail(format!(
            "{} solver tuple(s) and {} oracle tuple(s) unmatched",
            matching.unmatched_solver.len(),
            matching.unmatched_oracle.len()
        ));
    }
    report.spectrum = Some(spectrum);
    report.matching = Some(matching);
    Ok(())
}
