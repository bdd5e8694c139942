//! Exact-diagonalization ground truth for the joint spectrum of the charges.
//!
//! Everything here is built from the [`ModelSpec`] alone and never looks at
//! solver output.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bethe_solver::{lexicographic, max_distance, SolutionSet};
use crate::error::{Error, Result};
use crate::model::{charge_combination, charge_terms, ModelSpec};
use crate::pauli_ops::{hermitian_eigen_matrix, HermitianEigen, PauliSum, SpinOperator, DEFAULT_SPIN_CAP};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleOptions {
    pub seed: u64,
    pub max_spins: usize,
    /// Bound on `||R_i v - r_i v||`, relative to `max(1, max |r|)`.
    pub tol: f64,
    /// Bound on `||[R_i, R_j]||_F`, relative to `max_i ||R_i||_F^2`.
    pub commutator_tol: f64,
    pub max_redraws: usize,
    /// Eigenvalues of `H_c` closer than `degeneracy * ||H_c||` share a block.
    pub degeneracy: f64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            max_spins: DEFAULT_SPIN_CAP,
            tol: 1e-9,
            commutator_tol: 1e-10,
            max_redraws: 5,
            degeneracy: 1e-9,
        }
    }
}

/// Joint eigenvalues of `R_1..R_N`, one row per basis state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumTable {
    pub n_spins: usize,
    /// `2^N` rows in lexicographic order; degenerate rows repeat.
    pub tuples: Vec<Vec<f64>>,
    /// Worst `||R_i v - r_i v||` over states and charges.
    pub diag_residual: f64,
    pub combo_seed: u64,
    /// Weights `c` of the combination that was finally diagonalized.
    pub combination: Vec<f64>,
    pub redraws: usize,
    /// Whether degenerate blocks of `H_c` had to be rediagonalized charge by charge.
    pub block_refined: bool,
    /// Sizes of blocks no charge could split.
    pub persistent_degeneracy: Vec<usize>,
    pub max_commutator_norm: f64,
}

/// Diagonalizes a random combination `sum c_i R_i` and reads off `v^dag R_i v`.
///
/// Fails with [`Error::NonCommutingFamily`] when the charges do not commute and
/// with [`Error::OracleResidual`] when no rotation makes every charge diagonal.
pub fn joint_spectrum(spec: &ModelSpec, opts: &OracleOptions) -> Result<SpectrumTable> {
    let n = spec.n_spins();
    if n > opts.max_spins {
        return Err(Error::DimensionCap {
            n_spins: n,
            cap: opts.max_spins,
        });
    }
    let charges: Vec<PauliSum> = (0..n).map(|i| charge_terms(spec, i)).collect::<Result<_>>()?;

    let scale = charges
        .iter()
        .map(|r| r.frobenius_norm().powi(2))
        .fold(0.0, f64::max);
    let mut max_commutator_norm = 0.0f64;
    for i in 0..n {
        for j in i + 1..n {
            let norm = charges[i].commutator(&charges[j])?.frobenius_norm();
            max_commutator_norm = max_commutator_norm.max(norm);
        }
    }
    if max_commutator_norm > opts.commutator_tol * scale.max(1.0) {
        return Err(Error::NonCommutingFamily { max_commutator_norm });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut redraws = 0;
    loop {
        let weights: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let h = charge_combination(spec, &weights)?;
        let eig = hermitian_eigen_matrix(h.matrix())?;
        let (tuples, residual) = expectation_values(&charges, &eig.eigenvectors)?;
        let tolerance = opts.tol * tuple_scale(&tuples);

        if residual <= tolerance {
            return Ok(table(n, tuples, residual, opts, weights, redraws, false, Vec::new(), max_commutator_norm));
        }
        if redraws < opts.max_redraws {
            redraws += 1;
            continue;
        }

        let (vectors, persistent) = refine_blocks(&charges, &eig, opts.degeneracy)?;
        let (tuples, residual) = expectation_values(&charges, &vectors)?;
        let tolerance = opts.tol * tuple_scale(&tuples);
        if residual > tolerance {
            return Err(Error::OracleResidual { residual, tolerance });
        }
        return Ok(table(n, tuples, residual, opts, weights, redraws, true, persistent, max_commutator_norm));
    }
}

#[allow(clippy::too_many_arguments)]
fn table(
    n_spins: usize,
    mut tuples: Vec<Vec<f64>>,
    diag_residual: f64,
    opts: &OracleOptions,
    combination: Vec<f64>,
    redraws: usize,
    block_refined: bool,
    persistent_degeneracy: Vec<usize>,
    max_commutator_norm: f64,
) -> SpectrumTable {
    tuples.sort_by(|a, b| lexicographic(a, b));
    SpectrumTable {
        n_spins,
        tuples,
        diag_residual,
        combo_seed: opts.seed,
        combination,
        redraws,
        block_refined,
        persistent_degeneracy,
        max_commutator_norm,
    }
}

fn tuple_scale(tuples: &[Vec<f64>]) -> f64 {
    tuples
        .iter()
        .flatten()
        .fold(1.0f64, |m, r| m.max(r.abs()))
}

/// Rows `(v_k^dag R_i v_k)_i` and the worst eigen-residual.
fn expectation_values(
    charges: &[PauliSum],
    vectors: &DMatrix<Complex64>,
) -> Result<(Vec<Vec<f64>>, f64)> {
    let mut tuples = vec![vec![0.0; charges.len()]; vectors.ncols()];
    let mut worst = 0.0f64;
    for (i, charge) in charges.iter().enumerate() {
        let images = charge.apply_columns(vectors)?;
        for (k, row) in tuples.iter_mut().enumerate() {
            let v = vectors.column(k);
            let w = images.column(k);
            let r = v.dotc(&w).re;
            row[i] = r;
            worst = worst.max((w - v * Complex64::new(r, 0.0)).norm());
        }
    }
    Ok((tuples, worst))
}

/// Clusters of consecutive (ascending) values closer than `gap`.
fn clusters(values: &[f64], gap: f64) -> Vec<std::ops::Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    for k in 1..=values.len() {
        if k == values.len() || values[k] - values[k - 1] > gap {
            out.push(start..k);
            start = k;
        }
    }
    out
}

/// Rotates each degenerate block of `H_c` so that the charges become
/// diagonal on it, one charge at a time.
fn refine_blocks(
    charges: &[PauliSum],
    eig: &HermitianEigen,
    degeneracy: f64,
) -> Result<(DMatrix<Complex64>, Vec<usize>)> {
    let norm = eig.eigenvalues.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut vectors = eig.eigenvectors.clone();
    let mut persistent = Vec::new();
    let mut pending: Vec<(Vec<usize>, usize)> = clusters(&eig.eigenvalues, degeneracy * norm.max(1.0))
        .into_iter()
        .filter(|r| r.len() > 1)
        .map(|r| (r.collect(), 0))
        .collect();

    while let Some((columns, charge)) = pending.pop() {
        if charge == charges.len() {
            persistent.push(columns.len());
            continue;
        }
        let block = DMatrix::from_fn(vectors.nrows(), columns.len(), |r, c| vectors[(r, columns[c])]);
        let images = charges[charge].apply_columns(&block)?;
        let projected = block.adjoint() * images;
        let projected = (&projected + projected.adjoint()) * Complex64::new(0.5, 0.0);
        let local = hermitian_eigen_matrix(&projected)?;
        let rotated = &block * &local.eigenvectors;
        for (c, &col) in columns.iter().enumerate() {
            vectors.set_column(col, &rotated.column(c));
        }
        let local_norm = local.eigenvalues.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        for range in clusters(&local.eigenvalues, degeneracy * local_norm.max(1.0)) {
            if range.len() > 1 {
                pending.push((range.map(|c| columns[c]).collect(), charge + 1));
            }
        }
    }
    Ok((vectors, persistent))
}

/// One solver tuple paired with a group of coincident oracle rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchedPair {
    pub solver: Vec<f64>,
    pub oracle: Vec<f64>,
    /// Number of oracle rows in the group.
    pub multiplicity: usize,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchReport {
    pub tolerance: f64,
    pub pairs: Vec<MatchedPair>,
    pub unmatched_solver: Vec<Vec<f64>>,
    /// Oracle groups with their multiplicity.
    pub unmatched_oracle: Vec<(Vec<f64>, usize)>,
    /// Worst distance among matched pairs.
    pub max_distance: f64,
    /// Oracle rows covered by a match, counted with multiplicity.
    pub matched_states: usize,
    pub oracle_states: usize,
}

impl MatchReport {
    pub fn is_perfect(&self) -> bool {
        self.unmatched_solver.is_empty() && self.unmatched_oracle.is_empty()
    }
}

/// Groups lexicographically sorted rows that lie within `tol` of the group's first row.
fn group_rows(rows: &[Vec<f64>], tol: f64) -> Vec<(Vec<f64>, usize)> {
    let mut groups: Vec<(Vec<f64>, usize)> = Vec::new();
    for row in rows {
        match groups.iter_mut().find(|(g, _)| max_distance(g, row) <= tol) {
            Some(group) => group.1 += 1,
            None => groups.push((row.clone(), 1)),
        }
    }
    groups
}

/// Injective nearest-first matching in max-norm; pairs farther than `tol`
/// stay unmatched.
///
/// Coincident oracle rows (within `tol` of each other) form one group that a
/// single solver tuple matches with multiplicity.
pub fn match_spectra(solver: &SolutionSet, oracle: &SpectrumTable, tol: f64) -> MatchReport {
    let groups = group_rows(&oracle.tuples, tol);
    let mut candidates = Vec::new();
    for (s, t) in solver.tuples.iter().enumerate() {
        for (g, (row, _)) in groups.iter().enumerate() {
            let d = max_distance(&t.r, row);
            if d <= tol {
                candidates.push((d, s, g));
            }
        }
    }
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let mut solver_used = vec![false; solver.tuples.len()];
    let mut group_used = vec![false; groups.len()];
    let mut pairs = Vec::new();
    for (d, s, g) in candidates {
        if solver_used[s] || group_used[g] {
            continue;
        }
        solver_used[s] = true;
        group_used[g] = true;
        pairs.push(MatchedPair {
            solver: solver.tuples[s].r.clone(),
            oracle: groups[g].0.clone(),
            multiplicity: groups[g].1,
            distance: d,
        });
    }
    pairs.sort_by(|a, b| lexicographic(&a.oracle, &b.oracle));

    MatchReport {
        tolerance: tol,
        max_distance: pairs.iter().map(|p| p.distance).fold(0.0, f64::max),
        matched_states: pairs.iter().map(|p| p.multiplicity).sum(),
        oracle_states: oracle.tuples.len(),
        pairs,
        unmatched_solver: solver
            .tuples
            .iter()
            .zip(&solver_used)
            .filter(|(_, &used)| !used)
            .map(|(t, _)| t.r.clone())
            .collect(),
        unmatched_oracle: groups
            .into_iter()
            .zip(&group_used)
            .filter(|(_, &used)| !used)
            .map(|(g, _)| g)
            .collect(),
    }
}

/// `H_c = sum_i c_i R_i`.
pub fn hamiltonian(spec: &ModelSpec, c: &[f64]) -> Result<SpinOperator> {
    charge_combination(spec, c)
}

/// `sum_i c_i r_i`.
pub fn energy_from_tuple(c: &[f64], r: &[f64]) -> Result<f64> {
    if c.len() != r.len() {
        return Err(Error::LengthMismatch {
            expected: c.len(),
            got: r.len(),
        });
    }
    Ok(c.iter().zip(r).map(|(a, b)| a * b).sum())
}
