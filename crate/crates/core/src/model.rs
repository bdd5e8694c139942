//! Richardson-Gaudin models: fields, couplings, conserved charges and the
//! integrability certificate.
//!
//! The charge attached to spin `i` is
//!
//! ```text
//! R_i = sum_a B_i^a s_i^a + sum_{k != i} sum_a G_ik^a s_i^a s_k^a
//! ```
//!
//! and the family `{R_i}` commutes exactly when, for every permutation
//! `(a, b, c)` of `(x, y, z)`,
//!
//! ```text
//! B_i^c G_ji^b + B_j^c G_ij^a = 0                        (field constraint)
//! G_ik^a G_jk^b - G_ik^c G_ji^b - G_ij^a G_jk^c = 0      (Gaudin constraint)
//! ```
//!
//! Couplings are not assumed antisymmetric. Spin indices are 0-based.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli_ops::{commutator, PauliAxis, PauliString, PauliSum, SpinOperator};

/// Fields `B[i][axis]` and couplings `Gamma[i][j][axis]` of an `N`-spin model.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelSpec {
    #[serde(rename = "B")]
    fields: Vec<[f64; 3]>,
    #[serde(rename = "Gamma")]
    couplings: Vec<Vec<[f64; 3]>>,
}

impl ModelSpec {
    /// Validates shapes, finiteness and the zero diagonal of `couplings`.
    pub fn new(fields: Vec<[f64; 3]>, couplings: Vec<Vec<[f64; 3]>>) -> Result<Self> {
        let n = fields.len();
        if n == 0 {
            return Err(Error::InvalidModel("a model needs at least one spin".into()));
        }
        if couplings.len() != n || couplings.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidModel(format!(
                "Gamma must be {n} x {n} x 3 to match {n} field vectors"
            )));
        }
        for (i, b) in fields.iter().enumerate() {
            if b.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidModel(format!("B[{i}] is not finite")));
            }
        }
        for (i, row) in couplings.iter().enumerate() {
            for (j, g) in row.iter().enumerate() {
                if g.iter().any(|v| !v.is_finite()) {
                    return Err(Error::InvalidModel(format!("Gamma[{i}][{j}] is not finite")));
                }
                if i == j && g.iter().any(|&v| v != 0.0) {
                    return Err(Error::InvalidModel(format!(
                        "Gamma[{i}][{i}] must be zero (self-coupling is unused)"
                    )));
                }
            }
        }
        Ok(Self { fields, couplings })
    }

    /// Independent spins in the given fields.
    pub fn decoupled(fields: Vec<[f64; 3]>) -> Result<Self> {
        let n = fields.len();
        Self::new(fields, vec![vec![[0.0; 3]; n]; n])
    }

    pub fn n_spins(&self) -> usize {
        self.fields.len()
    }

    pub fn fields(&self) -> &[[f64; 3]] {
        &self.fields
    }

    pub fn couplings(&self) -> &[Vec<[f64; 3]>] {
        &self.couplings
    }

    #[inline]
    pub fn field(&self, i: usize, axis: PauliAxis) -> f64 {
        self.fields[i][axis.index()]
    }

    #[inline]
    pub fn coupling(&self, i: usize, j: usize, axis: PauliAxis) -> f64 {
        self.couplings[i][j][axis.index()]
    }

    /// `|B_i|^2`.
    pub fn field_norm_sq(&self, i: usize) -> f64 {
        self.fields[i].iter().map(|v| v * v).sum()
    }

    /// `sum_a sum_{k != i} (G_ik^a)^2`.
    pub fn coupling_norm_sq(&self, i: usize) -> f64 {
        self.couplings[i]
            .iter()
            .flat_map(|g| g.iter())
            .map(|v| v * v)
            .sum()
    }

    pub fn max_abs_coupling(&self) -> f64 {
        self.couplings
            .iter()
            .flat_map(|row| row.iter().flat_map(|g| g.iter()))
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Copy with a single coupling entry replaced.
    pub fn with_coupling(&self, i: usize, j: usize, axis: PauliAxis, value: f64) -> Result<Self> {
        let mut couplings = self.couplings.clone();
        let n = self.n_spins();
        if i >= n || j >= n {
            return Err(Error::IndexOutOfRange {
                index: i.max(j),
                n_spins: n,
            });
        }
        couplings[i][j][axis.index()] = value;
        Self::new(self.fields.clone(), couplings)
    }
}

/// Every coupling multiplied by `factor`, fields unchanged.
///
/// Both integrability constraints are homogeneous in the couplings, so the
/// integrable manifold is preserved.
pub fn scale_coupling(spec: &ModelSpec, factor: f64) -> ModelSpec {
    let couplings = spec
        .couplings
        .iter()
        .map(|row| row.iter().map(|g| g.map(|v| v * factor)).collect())
        .collect();
    ModelSpec {
        fields: spec.fields.clone(),
        couplings,
    }
}

/// Pauli-string expansion of `R_i`.
pub fn charge_terms(spec: &ModelSpec, i: usize) -> Result<PauliSum> {
    let n = spec.n_spins();
    if i >= n {
        return Err(Error::IndexOutOfRange { index: i, n_spins: n });
    }
    let mut sum = PauliSum::new(n);
    append_charge(&mut sum, spec, i, 1.0);
    Ok(sum)
}

fn append_charge(sum: &mut PauliSum, spec: &ModelSpec, i: usize, weight: f64) {
    let n = spec.n_spins();
    for axis in PauliAxis::ALL {
        sum.push(PauliString::single(n, i, axis), weight * spec.field(i, axis));
    }
    for k in (0..n).filter(|&k| k != i) {
        for axis in PauliAxis::ALL {
            sum.push(
                PauliString::pair(n, i, k, axis),
                weight * spec.coupling(i, k, axis),
            );
        }
    }
}

/// The conserved charge `R_i` as a dense operator.
pub fn build_charge(spec: &ModelSpec, i: usize) -> Result<SpinOperator> {
    charge_terms(spec, i)?.to_operator()
}

pub fn build_charges(spec: &ModelSpec) -> Result<Vec<SpinOperator>> {
    (0..spec.n_spins()).map(|i| build_charge(spec, i)).collect()
}

/// `sum_i weights[i] R_i`, assembled directly from Pauli strings.
pub fn charge_combination(spec: &ModelSpec, weights: &[f64]) -> Result<SpinOperator> {
    let n = spec.n_spins();
    if weights.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: weights.len(),
        });
    }
    let mut sum = PauliSum::new(n);
    for (i, &w) in weights.iter().enumerate() {
        append_charge(&mut sum, spec, i, w);
    }
    sum.to_operator()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintKind {
    Field,
    Gaudin,
    Commutator,
}

/// One constraint evaluation above tolerance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ConstraintKind,
    /// `(i, j)` for field and commutator checks, `(i, j, k)` for Gaudin.
    pub spins: Vec<usize>,
    /// `(a, b, c)` axis permutation, absent for commutator checks.
    pub axes: Option<[PauliAxis; 3]>,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegrabilityReport {
    pub tolerance: f64,
    /// Worst normalized field-constraint residual.
    pub max_field_residual: f64,
    /// Worst normalized Gaudin-constraint residual.
    pub max_gaudin_residual: f64,
    /// Worst `||[R_i, R_j]||_F`, when the numerical check ran.
    pub max_commutator_norm: Option<f64>,
    /// `max_i ||R_i||_F^2`; commutators pass below `tolerance * scale`.
    pub commutator_scale: Option<f64>,
    pub violations: Vec<Violation>,
}

impl IntegrabilityReport {
    pub fn algebraic_passed(&self) -> bool {
        !self
            .violations
            .iter()
            .any(|v| v.kind != ConstraintKind::Commutator)
    }

    pub fn commutators_passed(&self) -> Option<bool> {
        self.max_commutator_norm.map(|_| {
            !self
                .violations
                .iter()
                .any(|v| v.kind == ConstraintKind::Commutator)
        })
    }

    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

fn normalized(sum: f64, terms: &[f64]) -> f64 {
    let scale = terms.iter().fold(1.0f64, |m, t| m.max(t.abs()));
    sum.abs() / scale
}

/// Scans both constraint families over every ordered pair/triple of spins and
/// every axis permutation.
///
/// Each residual is divided by `max(1, largest term)` before comparison
/// with `tol`.
pub fn check_integrability_algebraic(spec: &ModelSpec, tol: f64) -> IntegrabilityReport {
    let n = spec.n_spins();
    let b = |i: usize, a: PauliAxis| spec.field(i, a);
    let g = |i: usize, j: usize, a: PauliAxis| spec.coupling(i, j, a);

    let mut report = IntegrabilityReport {
        tolerance: tol,
        max_field_residual: 0.0,
        max_gaudin_residual: 0.0,
        max_commutator_norm: None,
        commutator_scale: None,
        violations: Vec::new(),
    };

    for i in 0..n {
        for j in (0..n).filter(|&j| j != i) {
            for axes @ [a, bb, c] in PauliAxis::PERMUTATIONS {
                let t1 = b(i, c) * g(j, i, bb);
                let t2 = b(j, c) * g(i, j, a);
                let residual = normalized(t1 + t2, &[t1, t2]);
                report.max_field_residual = report.max_field_residual.max(residual);
                if residual > tol {
                    report.violations.push(Violation {
                        kind: ConstraintKind::Field,
                        spins: vec![i, j],
                        axes: Some(axes),
                        residual,
                    });
                }
            }
        }
    }

    for i in 0..n {
        for j in (0..n).filter(|&j| j != i) {
            for k in (0..n).filter(|&k| k != i && k != j) {
                for axes @ [a, bb, c] in PauliAxis::PERMUTATIONS {
                    let t1 = g(i, k, a) * g(j, k, bb);
                    let t2 = g(i, k, c) * g(j, i, bb);
                    let t3 = g(i, j, a) * g(j, k, c);
                    let residual = normalized(t1 - t2 - t3, &[t1, t2, t3]);
                    report.max_gaudin_residual = report.max_gaudin_residual.max(residual);
                    if residual > tol {
                        report.violations.push(Violation {
                            kind: ConstraintKind::Gaudin,
                            spins: vec![i, j, k],
                            axes: Some(axes),
                            residual,
                        });
                    }
                }
            }
        }
    }
    report
}

/// Algebraic scan plus explicit `||[R_i, R_j]||_F` for all `i < j`.
///
/// Commutators pass when the worst norm is at most `tol * max_i ||R_i||_F^2`.
pub fn check_commutators_numerical(
    spec: &ModelSpec,
    tol: f64,
    max_spins: usize,
) -> Result<IntegrabilityReport> {
    let n = spec.n_spins();
    if n > max_spins {
        return Err(Error::DimensionCap {
            n_spins: n,
            cap: max_spins,
        });
    }
    let mut report = check_integrability_algebraic(spec, tol);
    let charges = build_charges(spec)?;
    let scale = charges
        .iter()
        .map(|r| r.frobenius_norm().powi(2))
        .fold(0.0, f64::max);

    let mut norms = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            norms.push((i, j, commutator(&charges[i], &charges[j])?.frobenius_norm()));
        }
    }
    let worst = norms.iter().map(|t| t.2).fold(0.0, f64::max);
    for (i, j, norm) in norms {
        if norm > tol * scale {
            report.violations.push(Violation {
                kind: ConstraintKind::Commutator,
                spins: vec![i, j],
                axes: None,
                residual: norm,
            });
        }
    }
    report.max_commutator_norm = Some(worst);
    report.commutator_scale = Some(scale);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli_ops::{embed_pair, embed_single};
    use proptest::prelude::*;

    /// Rational couplings written out by hand so these tests do not depend on
    /// the catalog module.
    fn rational(eps: &[f64], field: f64) -> ModelSpec {
        let n = eps.len();
        let mut gamma = vec![vec![[0.0; 3]; n]; n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    gamma[i][j] = [0.5 / (eps[i] - eps[j]); 3];
                }
            }
        }
        ModelSpec::new(vec![[0.0, 0.0, field]; n], gamma).unwrap()
    }

    fn max_diff(a: &SpinOperator, b: &SpinOperator) -> f64 {
        a.checked_sub(b).unwrap().max_abs()
    }

    #[test]
    fn rejects_malformed_specs() {
        assert!(ModelSpec::new(vec![], vec![]).is_err());
        assert!(ModelSpec::new(vec![[0.0; 3]; 2], vec![vec![[0.0; 3]; 2]]).is_err());
        assert!(ModelSpec::new(vec![[f64::NAN, 0.0, 0.0]], vec![vec![[0.0; 3]]]).is_err());
        assert!(ModelSpec::new(vec![[0.0; 3]], vec![vec![[1.0, 0.0, 0.0]]]).is_err());
    }

    #[test]
    fn single_spin_charge() {
        let spec = ModelSpec::decoupled(vec![[0.0, 0.0, 0.7]]).unwrap();
        let r = build_charge(&spec, 0).unwrap();
        let expected = embed_single(1, 0, PauliAxis::Z).unwrap().scaled(0.7);
        assert_eq!(r, expected);
    }

    #[test]
    fn two_spin_rational_charge() {
        let spec = rational(&[0.0, 1.0], 1.0);
        assert_eq!(spec.coupling(0, 1, PauliAxis::X), -0.5);
        let r1 = build_charge(&spec, 0).unwrap();
        let mut expected = embed_single(2, 0, PauliAxis::Z).unwrap();
        for axis in PauliAxis::ALL {
            expected
                .add_scaled(-0.5, &embed_pair(2, 0, 1, axis).unwrap())
                .unwrap();
        }
        assert!(max_diff(&r1, &expected) <= 1e-15);
    }

    #[test]
    fn charge_index_checked() {
        let spec = rational(&[0.0, 1.0], 1.0);
        assert_eq!(
            build_charge(&spec, 2).unwrap_err(),
            Error::IndexOutOfRange { index: 2, n_spins: 2 }
        );
    }

    #[test]
    fn rational_model_is_integrable() {
        let spec = rational(&[0.0, 0.4, 1.3, 2.0], 0.8);
        let report = check_integrability_algebraic(&spec, 1e-12);
        assert!(report.passed(), "{report:?}");
        assert!(report.max_field_residual <= 1e-12);
        assert!(report.max_gaudin_residual <= 1e-12);

        let report = check_commutators_numerical(&spec, 1e-12, 12).unwrap();
        assert!(report.max_commutator_norm.unwrap() <= 1e-11);
    }

    #[test]
    fn zero_coupling_residuals_vanish() {
        let spec = ModelSpec::decoupled(vec![[0.3, -1.0, 2.0], [1.0, 0.5, 0.0], [0.0, 0.0, 4.0]])
            .unwrap();
        let report = check_commutators_numerical(&spec, 1e-12, 12).unwrap();
        assert_eq!(report.max_field_residual, 0.0);
        assert_eq!(report.max_gaudin_residual, 0.0);
        assert_eq!(report.max_commutator_norm, Some(0.0));
        assert!(report.passed());
    }

    #[test]
    fn perturbed_coupling_is_flagged() {
        let spec = rational(&[0.0, 1.0, 2.5], 1.0);
        let g = spec.coupling(0, 1, PauliAxis::X);
        let bad = spec.with_coupling(0, 1, PauliAxis::X, g + 0.1).unwrap();
        let report = check_integrability_algebraic(&bad, 1e-10);
        assert!(!report.algebraic_passed());
        assert!(report.max_gaudin_residual > 0.01, "{}", report.max_gaudin_residual);
        assert!(report
            .violations
            .iter()
            .any(|v| v.kind == ConstraintKind::Gaudin));

        let report = check_commutators_numerical(&bad, 1e-10, 12).unwrap();
        assert!(report.max_commutator_norm.unwrap() > 1e-3);
        assert_eq!(report.commutators_passed(), Some(false));
    }

    #[test]
    fn commutator_check_respects_cap() {
        let spec = rational(&[0.0, 1.0, 2.0], 1.0);
        assert_eq!(
            check_commutators_numerical(&spec, 1e-10, 2).unwrap_err(),
            Error::DimensionCap { n_spins: 3, cap: 2 }
        );
    }

    #[test]
    fn scaling_limits() {
        let spec = rational(&[0.0, 1.0, 3.0], 1.0);
        assert_eq!(scale_coupling(&spec, 1.0), spec);
        let off = scale_coupling(&spec, 0.0);
        assert_eq!(off.max_abs_coupling(), 0.0);
        assert_eq!(off.fields(), spec.fields());
        assert!(check_integrability_algebraic(&scale_coupling(&spec, 0.37), 1e-12).passed());
    }

    #[test]
    fn combination_matches_explicit_sum() {
        let spec = rational(&[0.0, 0.7, 1.9], 0.5);
        let w = [0.3, -1.2, 2.0];
        let direct = charge_combination(&spec, &w).unwrap();
        let mut summed = SpinOperator::zeros(3).unwrap();
        for (i, &wi) in w.iter().enumerate() {
            summed.add_scaled(wi, &build_charge(&spec, i).unwrap()).unwrap();
        }
        assert!(max_diff(&direct, &summed) <= 1e-14);
        assert!(charge_combination(&spec, &[1.0]).is_err());
    }

    fn arbitrary_spec(n: usize) -> impl Strategy<Value = ModelSpec> {
        (
            prop::collection::vec(prop::array::uniform3(-2.0f64..2.0), n),
            prop::collection::vec(prop::array::uniform3(-2.0f64..2.0), n * n),
        )
            .prop_map(move |(fields, flat)| {
                let mut gamma = vec![vec![[0.0; 3]; n]; n];
                for i in 0..n {
                    for j in 0..n {
                        if i != j {
                            gamma[i][j] = flat[i * n + j];
                        }
                    }
                }
                ModelSpec::new(fields, gamma).unwrap()
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn charges_are_hermitian_and_traceless(spec in arbitrary_spec(3)) {
            for i in 0..3 {
                let r = build_charge(&spec, i).unwrap();
                prop_assert!(r.hermiticity_deviation() <= 1e-14);
                prop_assert!(r.trace().norm() <= 1e-12);
            }
        }

        #[test]
        fn real_combinations_are_hermitian(
            spec in arbitrary_spec(3),
            w in prop::collection::vec(-3.0f64..3.0, 3),
        ) {
            let h = charge_combination(&spec, &w).unwrap();
            prop_assert!(h.hermiticity_deviation() <= 1e-13);
        }

        #[test]
        fn algebraic_pass_implies_commuting_charges(
            eps in prop::collection::vec(-3.0f64..3.0, 4),
            field in 0.1f64..2.0,
            factor in -2.0f64..2.0,
        ) {
            let mut sorted = eps.clone();
            sorted.sort_by(f64::total_cmp);
            prop_assume!(sorted.windows(2).all(|w| w[1] - w[0] > 0.05));
            let spec = scale_coupling(&rational(&eps, field), factor);
            let report = check_integrability_algebraic(&spec, 1e-12);
            prop_assert!(report.passed());
            let numeric = check_commutators_numerical(&spec, 1e-10, 12).unwrap();
            prop_assert_eq!(numeric.commutators_passed(), Some(true));
        }

        #[test]
        fn scaling_preserves_algebraic_status(
            spec in arbitrary_spec(3),
            factor in prop_oneof![-5.0f64..-0.01, 0.01f64..5.0],
        ) {
            let before = check_integrability_algebraic(&spec, 1e-9).algebraic_passed();
            let after = check_integrability_algebraic(&scale_coupling(&spec, factor), 1e-9)
                .algebraic_passed();
            prop_assert_eq!(before, after);
        }
    }
}
