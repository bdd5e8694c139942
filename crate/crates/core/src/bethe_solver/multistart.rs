use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{dedupe_set, default_dedupe_tol, newton_solve, NewtonOptions, SolutionSet};
use crate::quad_relations::QuadraticSystem;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MultistartOptions {
    pub newton: NewtonOptions,
    /// Defaults to `200 * 2^N`.
    pub sample_count: Option<usize>,
    pub seed: u64,
    /// Half-widths of the sampling box; defaults to `sqrt(K_i) + sum_j |C_ij|`.
    pub sampling_box: Option<Vec<f64>>,
    /// Defaults to `1e-7 (1 + max_i sqrt K_i)`.
    pub dedupe_tol: Option<f64>,
}

/// Root bound `sqrt(K_i) + sum_j |C_ij|` per coordinate.
pub fn default_box(qsys: &QuadraticSystem) -> Vec<f64> {
    let n = qsys.n_spins();
    (0..n)
        .map(|i| qsys.k(i).sqrt() + (0..n).map(|j| qsys.c(i, j).abs()).sum::<f64>())
        .collect()
}

/// Newton from uniformly sampled starts. Never fails; check
/// [`SolutionSet::is_complete`].
pub fn solve_all_multistart(qsys: &QuadraticSystem, opts: &MultistartOptions) -> SolutionSet {
    let n = qsys.n_spins();
    let count = opts.sample_count.unwrap_or(200 << n);
    let bounds = opts.sampling_box.clone().unwrap_or_else(|| default_box(qsys));
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let starts: Vec<Vec<f64>> = (0..count)
        .map(|_| {
            bounds
                .iter()
                .map(|&b| if b > 0.0 { rng.random_range(-b..=b) } else { 0.0 })
                .collect()
        })
        .collect();

    let tuples: Vec<_> = starts
        .par_iter()
        .filter_map(|r0| newton_solve(qsys, r0, &opts.newton).ok())
        .collect();
    let tol = opts.dedupe_tol.unwrap_or_else(|| default_dedupe_tol(qsys));
    dedupe_set(tuples, tol, n)
}
