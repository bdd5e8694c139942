//! Built-in model families and their shifted-charge relations.
//!
//! Every constructor runs the algebraic integrability scan on its output and
//! refuses to return a model that fails it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{build_charges, check_integrability_algebraic, ModelSpec};
use crate::pauli_ops::{PauliAxis, SpinOperator};

/// Tolerance of the integrability certificate attached to catalog output.
pub const CERTIFICATION_TOL: f64 = 1e-11;

/// Parameters of one catalog family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum CatalogParams {
    XxxRational {
        epsilon: Vec<f64>,
        #[serde(rename = "B")]
        field: f64,
    },
    XxzTrigonometric {
        epsilon: Vec<f64>,
        #[serde(rename = "B")]
        field: f64,
    },
    XxzPip {
        epsilon: Vec<f64>,
        #[serde(rename = "G")]
        g: f64,
        gamma: f64,
    },
}

impl CatalogParams {
    pub fn family(&self) -> &'static str {
        match self {
            Self::XxxRational { .. } => "xxx_rational",
            Self::XxzTrigonometric { .. } => "xxz_trigonometric",
            Self::XxzPip { .. } => "xxz_pip",
        }
    }

    pub fn epsilon(&self) -> &[f64] {
        match self {
            Self::XxxRational { epsilon, .. }
            | Self::XxzTrigonometric { epsilon, .. }
            | Self::XxzPip { epsilon, .. } => epsilon,
        }
    }

    pub fn n_spins(&self) -> usize {
        self.epsilon().len()
    }

    pub fn build(&self) -> Result<ModelSpec> {
        match self {
            Self::XxxRational { epsilon, field } => xxx_rational(epsilon, *field),
            Self::XxzTrigonometric { epsilon, field } => xxz_trigonometric(epsilon, *field),
            Self::XxzPip { epsilon, g, gamma } => xxz_pip(epsilon, *g, *gamma),
        }
    }
}

fn check_levels(epsilon: &[f64]) -> Result<()> {
    if epsilon.is_empty() {
        return Err(Error::InvalidCatalog("epsilon must not be empty".into()));
    }
    if let Some(i) = epsilon.iter().position(|e| !e.is_finite()) {
        return Err(Error::InvalidCatalog(format!("epsilon[{i}] is not finite")));
    }
    Ok(())
}

fn check_scalar(name: &str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidCatalog(format!("{name} is not finite")))
    }
}

fn certified(fields: Vec<[f64; 3]>, couplings: Vec<Vec<[f64; 3]>>, family: &str) -> Result<ModelSpec> {
    let spec = ModelSpec::new(fields, couplings)?;
    let report = check_integrability_algebraic(&spec, CERTIFICATION_TOL);
    if !report.algebraic_passed() {
        return Err(Error::InvalidCatalog(format!(
            "{family} parameters fail the integrability check (field {:e}, gaudin {:e})",
            report.max_field_residual, report.max_gaudin_residual
        )));
    }
    Ok(spec)
}

fn pairwise<F>(n: usize, mut coupling: F) -> Vec<Vec<[f64; 3]>>
where
    F: FnMut(usize, usize) -> [f64; 3],
{
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { [0.0; 3] } else { coupling(i, j) })
                .collect()
        })
        .collect()
}

/// Rational (XXX) Gaudin model: `G_ij^a = 1 / (2 (e_i - e_j))`, `B_i = (0, 0, B)`.
pub fn xxx_rational(epsilon: &[f64], field: f64) -> Result<ModelSpec> {
    check_levels(epsilon)?;
    check_scalar("B", field)?;
    let n = epsilon.len();
    for i in 0..n {
        for j in i + 1..n {
            if epsilon[i] == epsilon[j] {
                return Err(Error::InvalidCatalog(format!(
                    "epsilon[{i}] and epsilon[{j}] coincide"
                )));
            }
        }
    }
    let couplings = pairwise(n, |i, j| [0.5 / (epsilon[i] - epsilon[j]); 3]);
    certified(vec![[0.0, 0.0, field]; n], couplings, "xxx_rational")
}

/// p+ip pairing model coupled to a particle bath:
///
/// ```text
/// G_kk'^x = G_kk'^y = -(G/2) e_k e_k' / (e_k^2 - e_k'^2)
/// G_kk'^z         = -(G/2) e_k'^2   / (e_k^2 - e_k'^2)
/// B_k             = (gamma / e_k, 0, 1/2)
/// ```
pub fn xxz_pip(epsilon: &[f64], g: f64, gamma: f64) -> Result<ModelSpec> {
    check_levels(epsilon)?;
    check_scalar("G", g)?;
    check_scalar("gamma", gamma)?;
    let n = epsilon.len();
    if let Some(i) = epsilon.iter().position(|&e| e == 0.0) {
        return Err(Error::InvalidCatalog(format!("epsilon[{i}] is zero")));
    }
    for i in 0..n {
        for j in i + 1..n {
            if epsilon[i].powi(2) == epsilon[j].powi(2) {
                return Err(Error::InvalidCatalog(format!(
                    "epsilon[{i}]^2 and epsilon[{j}]^2 coincide"
                )));
            }
        }
    }
    let couplings = pairwise(n, |k, kp| {
        let d = epsilon[k].powi(2) - epsilon[kp].powi(2);
        let xy = -0.5 * g * epsilon[k] * epsilon[kp] / d;
        [xy, xy, -0.5 * g * epsilon[kp].powi(2) / d]
    });
    let fields = epsilon.iter().map(|e| [gamma / e, 0.0, 0.5]).collect();
    certified(fields, couplings, "xxz_pip")
}

/// Trigonometric (XXZ) Gaudin model:
/// `G^x = G^y = 1 / (2 sin(e_i - e_j))`, `G^z = cot(e_i - e_j) / 2`, `B_i = (0, 0, B)`.
pub fn xxz_trigonometric(epsilon: &[f64], field: f64) -> Result<ModelSpec> {
    check_levels(epsilon)?;
    check_scalar("B", field)?;
    let n = epsilon.len();
    for i in 0..n {
        for j in i + 1..n {
            let s = (epsilon[i] - epsilon[j]).sin();
            if s.abs() <= 1e-12 {
                return Err(Error::InvalidCatalog(format!(
                    "epsilon[{i}] - epsilon[{j}] is a multiple of pi"
                )));
            }
        }
    }
    let couplings = pairwise(n, |i, j| {
        let (s, c) = (epsilon[i] - epsilon[j]).sin_cos();
        let xy = 0.5 / s;
        [xy, xy, 0.5 * c / s]
    });
    certified(vec![[0.0, 0.0, field]; n], couplings, "xxz_trigonometric")
}

/// Scalar offsets `d_i` turning `R_i` into `R_i + d_i I`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChargeShift {
    pub offsets: Vec<f64>,
}

impl ChargeShift {
    pub fn apply(&self, charges: &[SpinOperator]) -> Vec<SpinOperator> {
        charges
            .iter()
            .zip(&self.offsets)
            .map(|(r, &d)| {
                let mut t = r.clone();
                t.shift_diagonal(d);
                t
            })
            .collect()
    }
}

/// `d_i = -(1/2) sum_{j != i} 1 / (e_i - e_j)`, mapping `R_i` to `T_i`.
pub fn xxx_shift(epsilon: &[f64]) -> ChargeShift {
    let n = epsilon.len();
    ChargeShift {
        offsets: (0..n)
            .map(|i| {
                -0.5 * (0..n)
                    .filter(|&j| j != i)
                    .map(|j| 1.0 / (epsilon[i] - epsilon[j]))
                    .sum::<f64>()
            })
            .collect(),
    }
}

/// `d_k = (1/2) (1 + G sum_{k' != k} e_k'^2 / (e_k^2 - e_k'^2))`, mapping `R_k`
/// to the shifted p+ip charge.
pub fn pip_shift(epsilon: &[f64], g: f64) -> ChargeShift {
    ChargeShift {
        offsets: (0..epsilon.len())
            .map(|k| 0.5 * (1.0 + g * level_weights(epsilon, k).iter().sum::<f64>()))
            .collect(),
    }
}

/// `a_k' = e_k'^2 / (e_k^2 - e_k'^2)` for every `k'`, zero at `k' = k`.
fn level_weights(epsilon: &[f64], k: usize) -> Vec<f64> {
    let ek = epsilon[k].powi(2);
    epsilon
        .iter()
        .enumerate()
        .map(|(kp, e)| if kp == k { 0.0 } else { e * e / (ek - e * e) })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftedRelationReport {
    pub tolerance: f64,
    /// `||lhs - rhs||_F / ||T_i^2||_F` per charge.
    pub residuals: Vec<f64>,
    pub passed: bool,
}

fn report(tolerance: f64, residuals: Vec<f64>) -> ShiftedRelationReport {
    let passed = residuals.iter().all(|&r| r <= tolerance);
    ShiftedRelationReport {
        tolerance,
        residuals,
        passed,
    }
}

fn shifted_charges(spec: &ModelSpec, shift: &ChargeShift, max_spins: usize) -> Result<Vec<SpinOperator>> {
    if spec.n_spins() > max_spins {
        return Err(Error::DimensionCap {
            n_spins: spec.n_spins(),
            cap: max_spins,
        });
    }
    Ok(shift.apply(&build_charges(spec)?))
}

/// Checks `T_i^2 = B^2 - sum_{j != i} (T_i - T_j) / (e_i - e_j)` on the dense
/// shifted XXX charges.
pub fn verify_shifted_relation_xxx(
    epsilon: &[f64],
    field: f64,
    tol: f64,
    max_spins: usize,
) -> Result<ShiftedRelationReport> {
    let spec = xxx_rational(epsilon, field)?;
    let t = shifted_charges(&spec, &xxx_shift(epsilon), max_spins)?;
    let n = epsilon.len();
    let mut residuals = Vec::with_capacity(n);
    for i in 0..n {
        let square = t[i].square();
        let mut d = square.clone();
        d.shift_diagonal(-field * field);
        for j in (0..n).filter(|&j| j != i) {
            let w = 1.0 / (epsilon[i] - epsilon[j]);
            d.add_scaled(w, &t[i])?;
            d.add_scaled(-w, &t[j])?;
        }
        residuals.push(d.frobenius_norm() / square.frobenius_norm().max(f64::MIN_POSITIVE));
    }
    Ok(report(tol, residuals))
}

/// Checks `R~_k^2 = R~_k + (gamma/e_k)^2 + G sum_{k' != k} e_k'^2 (R~_k - R~_k') / (e_k^2 - e_k'^2)`
/// on the dense shifted p+ip charges.
pub fn verify_shifted_relation_pip(
    epsilon: &[f64],
    g: f64,
    gamma: f64,
    tol: f64,
    max_spins: usize,
) -> Result<ShiftedRelationReport> {
    let spec = xxz_pip(epsilon, g, gamma)?;
    let t = shifted_charges(&spec, &pip_shift(epsilon, g), max_spins)?;
    let n = epsilon.len();
    let mut residuals = Vec::with_capacity(n);
    for k in 0..n {
        let square = t[k].square();
        let mut d = square.clone();
        d.add_scaled(-1.0, &t[k])?;
        d.shift_diagonal(-(gamma / epsilon[k]).powi(2));
        for (kp, a) in level_weights(epsilon, k).into_iter().enumerate() {
            if kp != k {
                d.add_scaled(-g * a, &t[k])?;
                d.add_scaled(g * a, &t[kp])?;
            }
        }
        residuals.push(d.frobenius_norm() / square.frobenius_norm().max(f64::MIN_POSITIVE));
    }
    Ok(report(tol, residuals))
}

fn normalized(terms: &[f64]) -> f64 {
    let sum: f64 = terms.iter().sum();
    sum.abs() / terms.iter().fold(1.0f64, |m, t| m.max(t.abs()))
}

/// Worst over `i` of the constant identity
///
/// ```text
/// -(1/4) sum_{j != i} sum_{k != i} 1/((e_i - e_j)(e_i - e_k))
/// +(1/2) sum_{j != i} sum_{k != j} 1/((e_i - e_j)(e_j - e_k))
/// +(3/4) sum_{j != i} 1/(e_i - e_j)^2                            = 0
/// ```
///
/// normalized by the largest of the three sums.
pub fn telescopic_identity_residual(epsilon: &[f64]) -> f64 {
    let n = epsilon.len();
    let inv = |a: usize, b: usize| 1.0 / (epsilon[a] - epsilon[b]);
    (0..n)
        .map(|i| {
            let mut first = 0.0;
            let mut second = 0.0;
            let mut third = 0.0;
            for j in (0..n).filter(|&j| j != i) {
                for k in (0..n).filter(|&k| k != i) {
                    first -= 0.25 * inv(i, j) * inv(i, k);
                }
                for k in (0..n).filter(|&k| k != j) {
                    second += 0.5 * inv(i, j) * inv(j, k);
                }
                third += 0.75 * inv(i, j).powi(2);
            }
            normalized(&[first, second, third])
        })
        .fold(0.0, f64::max)
}

/// Worst over `k` of the p+ip constant identity
///
/// ```text
/// -(G^2/4) sum_{k' != k} sum_{k'' != k} a_k' a_k''
/// +(G^2/2) sum_{k' != k} sum_{k'' != k'} a_k' b_k'k''
/// + sum_{k' != k} [ (G^2/2) (e_k e_k' / (e_k^2 - e_k'^2))^2 + (G^2/4) a_k'^2 ]   = 0
/// ```
///
/// with `a_k' = e_k'^2 / (e_k^2 - e_k'^2)` and `b_k'k'' = e_k''^2 / (e_k'^2 - e_k''^2)`,
/// normalized by the largest of the three sums.
pub fn pip_double_sum_residual(epsilon: &[f64], g: f64) -> f64 {
    let n = epsilon.len();
    let g2 = g * g;
    (0..n)
        .map(|k| {
            let a = level_weights(epsilon, k);
            let mut first = 0.0;
            let mut second = 0.0;
            let mut third = 0.0;
            for kp in (0..n).filter(|&kp| kp != k) {
                let b = level_weights(epsilon, kp);
                for kpp in (0..n).filter(|&kpp| kpp != k) {
                    first -= 0.25 * g2 * a[kp] * a[kpp];
                }
                for kpp in (0..n).filter(|&kpp| kpp != kp) {
                    second += 0.5 * g2 * a[kp] * b[kpp];
                }
                let xy = epsilon[k] * epsilon[kp] / (epsilon[k].powi(2) - epsilon[kp].powi(2));
                third += 0.5 * g2 * xy * xy + 0.25 * g2 * a[kp] * a[kp];
            }
            normalized(&[first, second, third])
        })
        .fold(0.0, f64::max)
}

/// One entry of the family listing.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilyInfo {
    pub family: &'static str,
    pub couplings: &'static str,
    pub fields: &'static str,
    /// `(name, meaning)` of each config parameter.
    pub parameters: Vec<(&'static str, &'static str)>,
}

pub fn families() -> Vec<FamilyInfo> {
    vec![
        FamilyInfo {
            family: "xxx_rational",
            couplings: "Gamma_ij^a = 1/(2 (epsilon_i - epsilon_j)) on every axis",
            fields: "B_i = (0, 0, B)",
            parameters: vec![
                ("epsilon", "distinct real levels, one per spin"),
                ("B", "uniform z field"),
            ],
        },
        FamilyInfo {
            family: "xxz_trigonometric",
            couplings: "Gamma^x = Gamma^y = 1/(2 sin(epsilon_i - epsilon_j)), Gamma^z = cot(epsilon_i - epsilon_j)/2",
            fields: "B_i = (0, 0, B)",
            parameters: vec![
                ("epsilon", "real levels with pairwise differences outside pi Z"),
                ("B", "uniform z field"),
            ],
        },
        FamilyInfo {
            family: "xxz_pip",
            couplings: "Gamma^x = Gamma^y = -(G/2) e_k e_k'/(e_k^2 - e_k'^2), Gamma^z = -(G/2) e_k'^2/(e_k^2 - e_k'^2)",
            fields: "B_k = (gamma/epsilon_k, 0, 1/2)",
            parameters: vec![
                ("epsilon", "nonzero levels with distinct squares"),
                ("G", "pairing strength"),
                ("gamma", "particle-bath amplitude"),
            ],
        },
    ]
}

/// `G_ij^a + G_ji^a` for one pair, used to exhibit non-skew couplings.
pub fn coupling_symmetric_part(spec: &ModelSpec, i: usize, j: usize, axis: PauliAxis) -> f64 {
    spec.coupling(i, j, axis) + spec.coupling(j, i, axis)
}
