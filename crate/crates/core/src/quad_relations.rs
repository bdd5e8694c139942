//! Quadratic operator relations `R_i^2 = sum_{j != i} C_ij R_j + K_i`.
//!
//! For an integrable model the constants are
//!
//! ```text
//! K_i  = sum_a (B_i^a)^2 + sum_a sum_{k != i} (G_ik^a)^2
//! C_ij = -2 G_ij^b G_ij^c / G_ji^a       (coupling route, any axis a)
//!      =  2 B_i^a G_ij^a / B_j^a          (field route, any axis a)
//! ```
//!
//! and the pair relation `C_ik G_kk'^a + C_ik' G_k'k^a = 2 G_ik^a G_ik'^a`
//! holds for all distinct `k, k' != i`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{build_charges, check_integrability_algebraic, ModelSpec};
use crate::pauli_ops::{PauliAxis, SpinOperator};

/// Which formula produced a coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "route", content = "axis")]
pub enum CoefficientRoute {
    Diagonal,
    /// `-2 G_ij^b G_ij^c / G_ji^a` with the recorded `a`.
    Coupling(PauliAxis),
    /// `2 B_i^a G_ij^a / B_j^a` with the recorded `a`.
    Field(PauliAxis),
    /// `G_ij = 0` on every axis.
    Decoupled,
    /// Given directly rather than derived from a model.
    Supplied,
}

/// Coefficients `C` (zero diagonal) and constants `K` of the `N` relations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadraticSystem {
    #[serde(rename = "C")]
    c: Vec<Vec<f64>>,
    #[serde(rename = "K")]
    k: Vec<f64>,
    provenance: Vec<Vec<CoefficientRoute>>,
}

impl QuadraticSystem {
    /// A system with caller-supplied coefficients.
    pub fn new(c: Vec<Vec<f64>>, k: Vec<f64>) -> Result<Self> {
        let n = k.len();
        if n == 0 {
            return Err(Error::InvalidModel("empty quadratic system".into()));
        }
        if c.len() != n || c.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidModel(format!("C must be {n} x {n}")));
        }
        for (i, row) in c.iter().enumerate() {
            if row[i] != 0.0 {
                return Err(Error::InvalidModel(format!("C[{i}][{i}] must be zero")));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidModel(format!("C[{i}] has non-finite entries")));
            }
        }
        if k.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidModel("K must be finite and nonnegative".into()));
        }
        let provenance = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        if i == j {
                            CoefficientRoute::Diagonal
                        } else {
                            CoefficientRoute::Supplied
                        }
                    })
                    .collect()
            })
            .collect();
        Ok(Self { c, k, provenance })
    }

    pub fn n_spins(&self) -> usize {
        self.k.len()
    }

    #[inline]
    pub fn c(&self, i: usize, j: usize) -> f64 {
        self.c[i][j]
    }

    #[inline]
    pub fn k(&self, i: usize) -> f64 {
        self.k[i]
    }

    pub fn coefficients(&self) -> &[Vec<f64>] {
        &self.c
    }

    pub fn constants(&self) -> &[f64] {
        &self.k
    }

    pub fn provenance(&self) -> &[Vec<CoefficientRoute>] {
        &self.provenance
    }

    /// Magnitude of the terms in each equation, `max(1, max_i K_i)`.
    pub fn residual_scale(&self) -> f64 {
        self.k.iter().fold(1.0, |m, &v| m.max(v))
    }
}

/// Denominators below `tol * (1 + max |G|)` count as zero.
pub fn denominator_cutoff(spec: &ModelSpec, tol: f64) -> f64 {
    tol * (1.0 + spec.max_abs_coupling())
}

/// `K_i`, the sum of squares of every parameter touching spin `i`.
pub fn relation_constant(spec: &ModelSpec, i: usize) -> f64 {
    spec.field_norm_sq(i) + spec.coupling_norm_sq(i)
}

/// `-2 G_ij^b G_ij^c / G_ji^a`.
pub fn coupling_route(spec: &ModelSpec, i: usize, j: usize, axis: PauliAxis) -> f64 {
    let [b, c] = axis.others();
    -2.0 * spec.coupling(i, j, b) * spec.coupling(i, j, c) / spec.coupling(j, i, axis)
}

/// `2 B_i^a G_ij^a / B_j^a`.
pub fn field_route(spec: &ModelSpec, i: usize, j: usize, axis: PauliAxis) -> f64 {
    2.0 * spec.field(i, axis) * spec.coupling(i, j, axis) / spec.field(j, axis)
}

fn largest_axis(candidates: impl Iterator<Item = (PauliAxis, f64)>) -> Option<PauliAxis> {
    candidates
        .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .map(|(axis, _)| axis)
}

/// Derives `C` and `K`, refusing models that fail the integrability scan at
/// `tol`.
///
/// When both the coupling and field routes apply they must agree to within
/// `tol` (relative to `max(1, |C|)`).
pub fn derive_coefficients(spec: &ModelSpec, tol: f64) -> Result<QuadraticSystem> {
    let report = check_integrability_algebraic(spec, tol);
    if !report.algebraic_passed() {
        return Err(Error::IntegrabilityViolation {
            max_field_residual: report.max_field_residual,
            max_gaudin_residual: report.max_gaudin_residual,
        });
    }
    derive(spec, tol, true)
}

/// Same formulas as [`derive_coefficients`] with no integrability or
/// cross-route checks. Used to study how the relations break.
pub fn derive_coefficients_unchecked(spec: &ModelSpec, tol: f64) -> Result<QuadraticSystem> {
    derive(spec, tol, false)
}

fn derive(spec: &ModelSpec, tol: f64, cross_check: bool) -> Result<QuadraticSystem> {
    let n = spec.n_spins();
    let cutoff = denominator_cutoff(spec, tol);
    let mut c = vec![vec![0.0; n]; n];
    let mut provenance = vec![vec![CoefficientRoute::Diagonal; n]; n];

    for i in 0..n {
        for j in (0..n).filter(|&j| j != i) {
            let gamma_axis = largest_axis(
                PauliAxis::ALL
                    .into_iter()
                    .map(|a| (a, spec.coupling(j, i, a)))
                    .filter(|(_, v)| v.abs() > cutoff),
            );
            let field_axis = largest_axis(
                PauliAxis::ALL
                    .into_iter()
                    .filter(|&a| spec.coupling(i, j, a) != 0.0)
                    .map(|a| (a, spec.field(j, a)))
                    .filter(|(_, v)| v.abs() > cutoff),
            );

            let (value, route) = match (gamma_axis, field_axis) {
                (Some(ga), fa) => {
                    let value = coupling_route(spec, i, j, ga);
                    if let (true, Some(fa)) = (cross_check, fa) {
                        let other = field_route(spec, i, j, fa);
                        let scale = 1f64.max(value.abs()).max(other.abs());
                        if (value - other).abs() > tol * scale {
                            return Err(Error::InternalInconsistency {
                                i,
                                j,
                                gamma_route: value,
                                field_route: other,
                            });
                        }
                    }
                    (value, CoefficientRoute::Coupling(ga))
                }
                (None, Some(fa)) => (field_route(spec, i, j, fa), CoefficientRoute::Field(fa)),
                (None, None) => {
                    if PauliAxis::ALL.iter().all(|&a| spec.coupling(i, j, a) == 0.0) {
                        (0.0, CoefficientRoute::Decoupled)
                    } else {
                        return Err(Error::DegenerateCoupling { i, j });
                    }
                }
            };
            c[i][j] = value;
            provenance[i][j] = route;
        }
    }

    let k = (0..n).map(|i| relation_constant(spec, i)).collect();
    Ok(QuadraticSystem { c, k, provenance })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub tolerance: f64,
    /// Worst `|variant - C_ij| / max(1, |C_ij|)` over coupling-route axes
    /// with a valid denominator.
    pub max_coupling_route_spread: f64,
    /// Same for field-route axes.
    pub max_field_route_spread: f64,
    /// Worst normalized residual of the pair relation over all distinct
    /// `(i, k, k')` and axes.
    pub max_pair_relation_residual: f64,
    pub passed: bool,
}

/// Cross-checks a derived system against every applicable route and the
/// pair relation.
pub fn check_coefficient_consistency(
    spec: &ModelSpec,
    qsys: &QuadraticSystem,
    tol: f64,
) -> ConsistencyReport {
    let n = spec.n_spins();
    let cutoff = denominator_cutoff(spec, tol);
    let mut coupling_spread = 0.0f64;
    let mut field_spread = 0.0f64;

    for i in 0..n {
        for j in (0..n).filter(|&j| j != i) {
            let target = qsys.c(i, j);
            let scale = 1f64.max(target.abs());
            for axis in PauliAxis::ALL {
                if spec.coupling(j, i, axis).abs() > cutoff {
                    let v = coupling_route(spec, i, j, axis);
                    coupling_spread = coupling_spread.max((v - target).abs() / scale);
                }
                if spec.field(j, axis).abs() > cutoff {
                    let v = field_route(spec, i, j, axis);
                    field_spread = field_spread.max((v - target).abs() / scale);
                }
            }
        }
    }

    let mut pair_residual = 0.0f64;
    for i in 0..n {
        for k in (0..n).filter(|&k| k != i) {
            for kp in (k + 1..n).filter(|&kp| kp != i) {
                for axis in PauliAxis::ALL {
                    let t1 = qsys.c(i, k) * spec.coupling(k, kp, axis);
                    let t2 = qsys.c(i, kp) * spec.coupling(kp, k, axis);
                    let t3 = 2.0 * spec.coupling(i, k, axis) * spec.coupling(i, kp, axis);
                    let scale = 1f64.max(t1.abs()).max(t2.abs()).max(t3.abs());
                    pair_residual = pair_residual.max((t1 + t2 - t3).abs() / scale);
                }
            }
        }
    }

    ConsistencyReport {
        tolerance: tol,
        max_coupling_route_spread: coupling_spread,
        max_field_route_spread: field_spread,
        max_pair_relation_residual: pair_residual,
        passed: coupling_spread <= tol && field_spread <= tol && pair_residual <= tol,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorIdentityReport {
    pub tolerance: f64,
    /// `||R_i^2 - sum_j C_ij R_j - K_i||_F / ||R_i^2||_F` per spin.
    pub residuals: Vec<f64>,
    /// `|Tr R_i^2 - 2^N K_i| / max(1, 2^N K_i)` per spin.
    pub trace_residuals: Vec<f64>,
    pub passed: bool,
}

/// Checks the relations as explicit matrix identities.
pub fn verify_operator_identity(
    spec: &ModelSpec,
    qsys: &QuadraticSystem,
    tol: f64,
    max_spins: usize,
) -> Result<OperatorIdentityReport> {
    let n = spec.n_spins();
    if n > max_spins {
        return Err(Error::DimensionCap {
            n_spins: n,
            cap: max_spins,
        });
    }
    if qsys.n_spins() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: qsys.n_spins(),
        });
    }
    let charges = build_charges(spec)?;
    let dim = (1usize << n) as f64;
    let mut residuals = Vec::with_capacity(n);
    let mut trace_residuals = Vec::with_capacity(n);
    for i in 0..n {
        let square = charges[i].square();
        let mut defect: SpinOperator = square.clone();
        for j in (0..n).filter(|&j| j != i) {
            defect.add_scaled(-qsys.c(i, j), &charges[j])?;
        }
        defect.shift_diagonal(-qsys.k(i));
        let norm = square.frobenius_norm();
        let denom = if norm > 0.0 { norm } else { 1.0 };
        residuals.push(defect.frobenius_norm() / denom);

        let expected = dim * qsys.k(i);
        trace_residuals.push((square.trace().re - expected).abs() / expected.max(1.0));
    }
    let passed = residuals.iter().all(|&r| r <= tol);
    Ok(OperatorIdentityReport {
        tolerance: tol,
        residuals,
        trace_residuals,
        passed,
    })
}
