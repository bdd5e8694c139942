//! Pauli-operator kernel on `N` spins-1/2.
//!
//! Spin `0` is the leftmost (most significant) tensor factor: in the
//! computational basis index `b`, spin `s` is encoded by bit `N - 1 - s`,
//! with bit value 0 for the `+1` eigenstate of `sigma^z`.
//!
//! Operators are assembled from Pauli strings by acting directly on basis
//! states, so no intermediate Kronecker products are ever materialised.

use std::collections::HashMap;
use std::fmt;

use nalgebra::{DMatrix, Matrix2, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest spin count for which dense operators are ever built.
pub const MAX_DENSE_SPINS: usize = 16;

/// Default spin-count cap for dense diagonalization (4096 x 4096).
pub const DEFAULT_SPIN_CAP: usize = 12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PauliAxis {
    X,
    Y,
    Z,
}

impl PauliAxis {
    pub const ALL: [PauliAxis; 3] = [PauliAxis::X, PauliAxis::Y, PauliAxis::Z];

    /// The six orderings of `(x, y, z)`, in lexicographic order.
    pub const PERMUTATIONS: [[PauliAxis; 3]; 6] = {
        use PauliAxis::*;
        [
            [X, Y, Z],
            [X, Z, Y],
            [Y, X, Z],
            [Y, Z, X],
            [Z, X, Y],
            [Z, Y, X],
        ]
    };

    pub const fn index(self) -> usize {
        match self {
            PauliAxis::X => 0,
            PauliAxis::Y => 1,
            PauliAxis::Z => 2,
        }
    }

    pub const fn from_index(index: usize) -> Option<Self> {
        match index {
            0 => Some(PauliAxis::X),
            1 => Some(PauliAxis::Y),
            2 => Some(PauliAxis::Z),
            _ => None,
        }
    }

    /// The two axes perpendicular to `self`, in canonical order.
    pub const fn others(self) -> [PauliAxis; 2] {
        match self {
            PauliAxis::X => [PauliAxis::Y, PauliAxis::Z],
            PauliAxis::Y => [PauliAxis::X, PauliAxis::Z],
            PauliAxis::Z => [PauliAxis::X, PauliAxis::Y],
        }
    }

    /// Levi-Civita symbol.
    pub fn levi_civita(a: PauliAxis, b: PauliAxis, c: PauliAxis) -> f64 {
        let (a, b, c) = (a.index() as i32, b.index() as i32, c.index() as i32);
        ((b - a) * (c - a) * (c - b)) as f64 / 2.0
    }
}

impl fmt::Display for PauliAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PauliAxis::X => "x",
            PauliAxis::Y => "y",
            PauliAxis::Z => "z",
        })
    }
}

/// The standard 2x2 Pauli matrix along `axis`.
pub fn pauli_2x2(axis: PauliAxis) -> Matrix2<Complex64> {
    match axis {
        PauliAxis::X => Matrix2::new(ZERO, ONE, ONE, ZERO),
        PauliAxis::Y => Matrix2::new(ZERO, -I, I, ZERO),
        PauliAxis::Z => Matrix2::new(ONE, ZERO, ZERO, -ONE),
    }
}

/// A tensor product of single-spin Paulis, stored as bit masks.
///
/// `x_mask` marks spins carrying `X` or `Y`, `z_mask` those carrying `Z` or
/// `Y`. The string acts as `i^{#Y} X^{x_mask} Z^{z_mask}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct PauliString {
    x_mask: u64,
    z_mask: u64,
}

impl PauliString {
    pub fn identity() -> Self {
        Self::default()
    }

    /// Multiplies `axis` onto spin `spin` of an `n_spins` register.
    ///
    /// Only valid when the spin is not already occupied; callers build
    /// strings over distinct spins.
    fn with(mut self, n_spins: usize, spin: usize, axis: PauliAxis) -> Self {
        let bit = 1u64 << (n_spins - 1 - spin);
        debug_assert_eq!((self.x_mask | self.z_mask) & bit, 0);
        match axis {
            PauliAxis::X => self.x_mask |= bit,
            PauliAxis::Y => {
                self.x_mask |= bit;
                self.z_mask |= bit;
            }
            PauliAxis::Z => self.z_mask |= bit,
        }
        self
    }

    pub fn single(n_spins: usize, spin: usize, axis: PauliAxis) -> Self {
        Self::identity().with(n_spins, spin, axis)
    }

    pub fn pair(n_spins: usize, a: usize, b: usize, axis: PauliAxis) -> Self {
        Self::single(n_spins, a, axis).with(n_spins, b, axis)
    }

    fn y_phase(&self) -> Complex64 {
        match (self.x_mask & self.z_mask).count_ones() % 4 {
            0 => ONE,
            1 => I,
            2 => -ONE,
            _ => -I,
        }
    }

    /// Image of basis state `b`: returns `(b', phase)` with `P|b> = phase |b'>`.
    #[inline]
    fn apply(&self, basis: u64, y_phase: Complex64) -> (u64, Complex64) {
        let sign = if (basis & self.z_mask).count_ones() % 2 == 0 {
            1.0
        } else {
            -1.0
        };
        (basis ^ self.x_mask, y_phase * sign)
    }

    /// Whether the two strings commute; otherwise they anticommute.
    pub fn commutes_with(&self, other: &Self) -> bool {
        ((self.x_mask & other.z_mask).count_ones() + (self.z_mask & other.x_mask).count_ones())
            % 2
            == 0
    }

    /// `self * other = phase * string`.
    pub fn product(&self, other: &Self) -> (Self, Complex64) {
        let string = Self {
            x_mask: self.x_mask ^ other.x_mask,
            z_mask: self.z_mask ^ other.z_mask,
        };
        // i^{y1} X^x1 Z^z1 i^{y2} X^x2 Z^z2 = i^{y1+y2} (-1)^{|z1 & x2|} X^x3 Z^z3
        let sign = if (self.z_mask & other.x_mask).count_ones() % 2 == 0 {
            ONE
        } else {
            -ONE
        };
        let phase = self.y_phase() * other.y_phase() * sign / string.y_phase();
        (string, phase)
    }
}

/// A linear combination of Pauli strings on a fixed register.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliSum {
    n_spins: usize,
    terms: Vec<(PauliString, Complex64)>,
}

impl PauliSum {
    pub fn new(n_spins: usize) -> Self {
        Self {
            n_spins,
            terms: Vec::new(),
        }
    }

    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    pub fn terms(&self) -> &[(PauliString, Complex64)] {
        &self.terms
    }

    pub fn push(&mut self, string: PauliString, coefficient: impl Into<Complex64>) {
        let coefficient = coefficient.into();
        if coefficient != ZERO {
            self.terms.push((string, coefficient));
        }
    }

    /// Dense matrix of the sum, built column by column from basis images.
    pub fn to_operator(&self) -> Result<SpinOperator> {
        check_dense(self.n_spins)?;
        let dim = 1usize << self.n_spins;
        let mut matrix = DMatrix::<Complex64>::zeros(dim, dim);
        for (string, coefficient) in &self.terms {
            let phase = string.y_phase() * coefficient;
            for col in 0..dim {
                let (row, amp) = string.apply(col as u64, phase);
                matrix[(row as usize, col)] += amp;
            }
        }
        Ok(SpinOperator {
            n_spins: self.n_spins,
            matrix,
        })
    }
}

impl PauliSum {
    /// Applies the sum to every column of `vectors` without forming a matrix.
    pub fn apply_columns(&self, vectors: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
        let dim = 1usize << self.n_spins;
        if vectors.nrows() != dim {
            return Err(Error::DimensionMismatch {
                left: dim,
                right: vectors.nrows(),
            });
        }
        let mut out = DMatrix::<Complex64>::zeros(dim, vectors.ncols());
        for (string, coefficient) in &self.terms {
            let phase = string.y_phase() * coefficient;
            for row in 0..dim {
                let (image, amp) = string.apply(row as u64, phase);
                let image = image as usize;
                for col in 0..vectors.ncols() {
                    out[(image, col)] += amp * vectors[(row, col)];
                }
            }
        }
        Ok(out)
    }

    /// `[self, other]` with like strings combined and exact zeros dropped.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        if self.n_spins != other.n_spins {
            return Err(Error::DimensionMismatch {
                left: 1 << self.n_spins,
                right: 1 << other.n_spins,
            });
        }
        let mut acc: HashMap<PauliString, Complex64> = HashMap::new();
        for (p, a) in &self.terms {
            for (q, b) in &other.terms {
                if !p.commutes_with(q) {
                    let (string, phase) = p.product(q);
                    *acc.entry(string).or_insert(ZERO) += 2.0 * phase * a * b;
                }
            }
        }
        let mut sum = Self::new(self.n_spins);
        let mut entries: Vec<_> = acc.into_iter().collect();
        entries.sort_by_key(|(s, _)| (s.x_mask, s.z_mask));
        for (string, coefficient) in entries {
            sum.push(string, coefficient);
        }
        Ok(sum)
    }

    /// Frobenius norm of the represented operator, assuming distinct strings.
    pub fn frobenius_norm(&self) -> f64 {
        let weight: f64 = self.terms.iter().map(|(_, c)| c.norm_sqr()).sum();
        (weight * (1u64 << self.n_spins) as f64).sqrt()
    }
}

fn check_dense(n_spins: usize) -> Result<()> {
    if n_spins > MAX_DENSE_SPINS {
        return Err(Error::DimensionCap {
            n_spins,
            cap: MAX_DENSE_SPINS,
        });
    }
    Ok(())
}

fn check_index(n_spins: usize, index: usize) -> Result<()> {
    if index >= n_spins {
        return Err(Error::IndexOutOfRange { index, n_spins });
    }
    Ok(())
}

/// Dense operator on the `2^N`-dimensional Hilbert space of `N` spins.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinOperator {
    n_spins: usize,
    matrix: DMatrix<Complex64>,
}

impl SpinOperator {
    pub fn zeros(n_spins: usize) -> Result<Self> {
        check_dense(n_spins)?;
        let dim = 1usize << n_spins;
        Ok(Self {
            n_spins,
            matrix: DMatrix::zeros(dim, dim),
        })
    }

    pub fn identity(n_spins: usize) -> Result<Self> {
        check_dense(n_spins)?;
        let dim = 1usize << n_spins;
        Ok(Self {
            n_spins,
            matrix: DMatrix::identity(dim, dim),
        })
    }

    /// Wraps a square matrix whose side is `2^n_spins`.
    pub fn from_matrix(n_spins: usize, matrix: DMatrix<Complex64>) -> Result<Self> {
        check_dense(n_spins)?;
        let dim = 1usize << n_spins;
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::DimensionMismatch {
                left: dim,
                right: matrix.nrows().max(matrix.ncols()),
            });
        }
        Ok(Self { n_spins, matrix })
    }

    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.matrix
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(Self {
            n_spins: self.n_spins,
            matrix: &self.matrix + &other.matrix,
        })
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(Self {
            n_spins: self.n_spins,
            matrix: &self.matrix - &other.matrix,
        })
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(Self {
            n_spins: self.n_spins,
            matrix: &self.matrix * &other.matrix,
        })
    }

    /// `self += coefficient * other`.
    pub fn add_scaled(&mut self, coefficient: f64, other: &Self) -> Result<()> {
        self.check_same(other)?;
        self.matrix
            .zip_apply(&other.matrix, |a, b| *a += b * coefficient);
        Ok(())
    }

    /// `self += shift * I`.
    pub fn shift_diagonal(&mut self, shift: f64) {
        for k in 0..self.dim() {
            self.matrix[(k, k)] += shift;
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            n_spins: self.n_spins,
            matrix: self.matrix.map(|z| z * factor),
        }
    }

    pub fn square(&self) -> Self {
        Self {
            n_spins: self.n_spins,
            matrix: &self.matrix * &self.matrix,
        }
    }

    pub fn adjoint(&self) -> Self {
        Self {
            n_spins: self.n_spins,
            matrix: self.matrix.adjoint(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.diagonal().iter().sum()
    }

    /// Largest entry of `|A - A^dagger|`.
    pub fn hermiticity_deviation(&self) -> f64 {
        hermiticity_deviation(&self.matrix)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_deviation() <= tol
    }

    /// True when every entry is real.
    pub fn has_real_entries(&self) -> bool {
        self.matrix.iter().all(|z| z.im == 0.0)
    }
}

/// `sigma_i^axis` on an `n_spins` register (0-based `spin`).
pub fn embed_single(n_spins: usize, spin: usize, axis: PauliAxis) -> Result<SpinOperator> {
    check_index(n_spins, spin)?;
    let mut sum = PauliSum::new(n_spins);
    sum.push(PauliString::single(n_spins, spin, axis), 1.0);
    sum.to_operator()
}

/// `sigma_i^axis sigma_j^axis` for distinct spins.
pub fn embed_pair(n_spins: usize, i: usize, j: usize, axis: PauliAxis) -> Result<SpinOperator> {
    check_index(n_spins, i)?;
    check_index(n_spins, j)?;
    if i == j {
        return Err(Error::SameSpin(i));
    }
    let mut sum = PauliSum::new(n_spins);
    sum.push(PauliString::pair(n_spins, i, j, axis), 1.0);
    sum.to_operator()
}

/// `AB - BA`.
pub fn commutator(a: &SpinOperator, b: &SpinOperator) -> Result<SpinOperator> {
    a.check_same(b)?;
    Ok(SpinOperator {
        n_spins: a.n_spins,
        matrix: &a.matrix * &b.matrix - &b.matrix * &a.matrix,
    })
}

/// `AB + BA`.
pub fn anticommutator(a: &SpinOperator, b: &SpinOperator) -> Result<SpinOperator> {
    a.check_same(b)?;
    Ok(SpinOperator {
        n_spins: a.n_spins,
        matrix: &a.matrix * &b.matrix + &b.matrix * &a.matrix,
    })
}

pub fn frobenius_norm(a: &SpinOperator) -> f64 {
    a.frobenius_norm()
}

pub fn trace(a: &SpinOperator) -> Complex64 {
    a.trace()
}

/// Spectral decomposition of a Hermitian operator.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors as columns, in eigenvalue order.
    pub eigenvectors: DMatrix<Complex64>,
}

/// Diagonalizes a Hermitian operator of at most `max_spins` spins.
///
/// Real symmetric input takes a real solver path.
pub fn hermitian_eigendecomposition(a: &SpinOperator, max_spins: usize) -> Result<HermitianEigen> {
    if a.n_spins > max_spins {
        return Err(Error::DimensionCap {
            n_spins: a.n_spins,
            cap: max_spins,
        });
    }
    hermitian_eigen_matrix(&a.matrix)
}

fn hermiticity_deviation(matrix: &DMatrix<Complex64>) -> f64 {
    let n = matrix.nrows();
    let mut worst = 0.0f64;
    for c in 0..n {
        for r in c..n {
            worst = worst.max((matrix[(r, c)] - matrix[(c, r)].conj()).norm());
        }
    }
    worst
}

/// Same as [`hermitian_eigendecomposition`] for an arbitrary square matrix.
pub(crate) fn hermitian_eigen_matrix(matrix: &DMatrix<Complex64>) -> Result<HermitianEigen> {
    let deviation = hermiticity_deviation(matrix);
    let scale = matrix.iter().map(|z| z.norm()).fold(1.0, f64::max);
    if deviation > 1e-10 * scale {
        return Err(Error::NonHermitian { deviation });
    }

    let (values, vectors): (Vec<f64>, DMatrix<Complex64>) =
        if matrix.iter().all(|z| z.im == 0.0) {
            let real = matrix.map(|z| z.re);
            let eig = SymmetricEigen::new(real);
            (
                eig.eigenvalues.iter().copied().collect(),
                eig.eigenvectors.map(|x| Complex64::new(x, 0.0)),
            )
        } else {
            let eig = SymmetricEigen::new(matrix.clone());
            (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
        };

    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&p, &q| values[p].total_cmp(&values[q]));
    let eigenvalues = order.iter().map(|&k| values[k]).collect();
    let eigenvectors = DMatrix::from_fn(vectors.nrows(), vectors.ncols(), |r, c| {
        vectors[(r, order[c])]
    });
    Ok(HermitianEigen {
        eigenvalues,
        eigenvectors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn max_entry_diff(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
        (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Kronecker-product reference, independent of the bit-mask path.
    fn kron_reference(n: usize, factors: &[(usize, PauliAxis)]) -> DMatrix<Complex64> {
        let mut out = DMatrix::<Complex64>::from_element(1, 1, ONE);
        for spin in 0..n {
            let local = factors
                .iter()
                .find(|(s, _)| *s == spin)
                .map(|(_, axis)| pauli_2x2(*axis))
                .unwrap_or_else(Matrix2::identity);
            let local = DMatrix::from_fn(2, 2, |r, c| local[(r, c)]);
            out = out.kronecker(&local);
        }
        out
    }

    #[test]
    fn pauli_matrices_are_standard() {
        assert_eq!(pauli_2x2(PauliAxis::X), Matrix2::new(ZERO, ONE, ONE, ZERO));
        assert_eq!(pauli_2x2(PauliAxis::Z), Matrix2::new(ONE, ZERO, ZERO, -ONE));
        let y = pauli_2x2(PauliAxis::Y);
        assert_eq!(y * y, Matrix2::identity());
        for axis in PauliAxis::ALL {
            let p = pauli_2x2(axis);
            assert_eq!(p.adjoint(), p);
            assert_eq!(p.trace(), ZERO);
            assert_eq!(p * p, Matrix2::identity());
        }
    }

    #[test]
    fn levi_civita_signs() {
        use PauliAxis::*;
        assert_eq!(PauliAxis::levi_civita(X, Y, Z), 1.0);
        assert_eq!(PauliAxis::levi_civita(Y, Z, X), 1.0);
        assert_eq!(PauliAxis::levi_civita(Y, X, Z), -1.0);
        assert_eq!(PauliAxis::levi_civita(Z, Y, X), -1.0);
        assert_eq!(PauliAxis::levi_civita(X, X, Z), 0.0);
    }

    #[test]
    fn single_spin_z() {
        let z = embed_single(1, 0, PauliAxis::Z).unwrap();
        let expected = DMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]);
        assert_eq!(z.matrix(), &expected);
    }

    #[test]
    fn second_spin_x_is_block_antidiagonal() {
        let op = embed_single(2, 1, PauliAxis::X).unwrap();
        #[rustfmt::skip]
        let expected = DMatrix::from_row_slice(4, 4, &[
            ZERO, ONE, ZERO, ZERO,
            ONE, ZERO, ZERO, ZERO,
            ZERO, ZERO, ZERO, ONE,
            ZERO, ZERO, ONE, ZERO,
        ]);
        assert_eq!(op.matrix(), &expected);
    }

    #[test]
    fn embeddings_match_kronecker_products() {
        for n in 1..=4 {
            for spin in 0..n {
                for axis in PauliAxis::ALL {
                    let op = embed_single(n, spin, axis).unwrap();
                    assert_eq!(op.matrix(), &kron_reference(n, &[(spin, axis)]));
                }
            }
        }
        let op = embed_pair(3, 0, 2, PauliAxis::Y).unwrap();
        assert_eq!(
            op.matrix(),
            &kron_reference(3, &[(0, PauliAxis::Y), (2, PauliAxis::Y)])
        );
    }

    #[test]
    fn distinct_spins_commute() {
        let y2 = embed_single(3, 1, PauliAxis::Y).unwrap();
        let x1 = embed_single(3, 0, PauliAxis::X).unwrap();
        let z3 = embed_single(3, 2, PauliAxis::Z).unwrap();
        assert_eq!(commutator(&y2, &x1).unwrap().frobenius_norm(), 0.0);
        assert_eq!(commutator(&y2, &z3).unwrap().frobenius_norm(), 0.0);
    }

    #[test]
    fn zz_pair_is_diagonal() {
        let zz = embed_pair(2, 0, 1, PauliAxis::Z).unwrap();
        let expected = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            ONE, -ONE, -ONE, ONE,
        ]));
        assert_eq!(zz.matrix(), &expected);
        assert_eq!(zz.trace(), ZERO);
    }

    #[test]
    fn pair_is_symmetric_and_equals_product() {
        for axis in PauliAxis::ALL {
            let a = embed_pair(3, 0, 2, axis).unwrap();
            let b = embed_pair(3, 2, 0, axis).unwrap();
            assert_eq!(a, b);
            let product = embed_single(3, 0, axis)
                .unwrap()
                .checked_mul(&embed_single(3, 2, axis).unwrap())
                .unwrap();
            assert!(max_entry_diff(a.matrix(), product.matrix()) == 0.0);
        }
    }

    #[test]
    fn pair_rejects_same_spin_and_bad_index() {
        assert_eq!(embed_pair(3, 1, 1, PauliAxis::X), Err(Error::SameSpin(1)));
        assert_eq!(
            embed_single(3, 3, PauliAxis::X),
            Err(Error::IndexOutOfRange {
                index: 3,
                n_spins: 3
            })
        );
    }

    #[test]
    fn embedded_paulis_are_traceless_hermitian_involutions() {
        let n = 3;
        let identity = SpinOperator::identity(n).unwrap();
        for axis in PauliAxis::ALL {
            for i in 0..n {
                let single = embed_single(n, i, axis).unwrap();
                assert!(single.trace().norm() <= 1e-12);
                assert!(single.is_hermitian(1e-12));
                assert!(max_entry_diff(single.square().matrix(), identity.matrix()) <= 1e-12);
                for j in 0..n {
                    if i == j {
                        continue;
                    }
                    let pair = embed_pair(n, i, j, axis).unwrap();
                    assert!(pair.trace().norm() <= 1e-12);
                    assert!(pair.is_hermitian(1e-12));
                    assert!(max_entry_diff(pair.square().matrix(), identity.matrix()) <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn same_spin_algebra() {
        let n = 2;
        let identity = SpinOperator::identity(n).unwrap();
        for spin in 0..n {
            for a in PauliAxis::ALL {
                for b in PauliAxis::ALL {
                    let sa = embed_single(n, spin, a).unwrap();
                    let sb = embed_single(n, spin, b).unwrap();
                    let mut expected_comm = SpinOperator::zeros(n).unwrap();
                    for g in PauliAxis::ALL {
                        let eps = PauliAxis::levi_civita(a, b, g);
                        if eps != 0.0 {
                            let sg = embed_single(n, spin, g).unwrap();
                            expected_comm = SpinOperator {
                                n_spins: n,
                                matrix: expected_comm.matrix + sg.matrix.map(|z| z * c(0.0, 2.0 * eps)),
                            };
                        }
                    }
                    let comm = commutator(&sa, &sb).unwrap();
                    assert!(max_entry_diff(comm.matrix(), expected_comm.matrix()) <= 1e-14);

                    let anti = anticommutator(&sa, &sb).unwrap();
                    let expected_anti = if a == b {
                        identity.scaled(2.0)
                    } else {
                        SpinOperator::zeros(n).unwrap()
                    };
                    assert!(max_entry_diff(anti.matrix(), expected_anti.matrix()) <= 1e-14);
                }
            }
        }
    }

    #[test]
    fn xy_commutator_and_anticommutator() {
        let x = embed_single(1, 0, PauliAxis::X).unwrap();
        let y = embed_single(1, 0, PauliAxis::Y).unwrap();
        let z = embed_single(1, 0, PauliAxis::Z).unwrap();
        let comm = commutator(&x, &y).unwrap();
        assert_eq!(comm.matrix(), &z.matrix().map(|v| v * c(0.0, 2.0)));
        assert_eq!(anticommutator(&x, &y).unwrap().frobenius_norm(), 0.0);
    }

    #[test]
    fn pauli_sum_algebra_matches_dense() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let n = 3;
        let mut a = PauliSum::new(n);
        let mut b = PauliSum::new(n);
        for i in 0..n {
            for axis in PauliAxis::ALL {
                a.push(PauliString::single(n, i, axis), rng.random_range(-1.0..1.0));
                for k in (0..n).filter(|&k| k != i) {
                    b.push(PauliString::pair(n, i, k, axis), rng.random_range(-1.0..1.0));
                }
            }
        }
        let dense_a = a.to_operator().unwrap();
        let dense_b = b.to_operator().unwrap();
        let dense = commutator(&dense_a, &dense_b).unwrap();
        let algebraic = a.commutator(&b).unwrap();
        let diff = algebraic.to_operator().unwrap().checked_sub(&dense).unwrap();
        assert!(diff.max_abs() <= 1e-13);
        assert!((algebraic.frobenius_norm() - dense.frobenius_norm()).abs() <= 1e-12);

        let vectors = DMatrix::from_fn(8, 3, |r, c| Complex64::new((r * c) as f64, r as f64 - c as f64));
        let applied = a.apply_columns(&vectors).unwrap();
        assert!((applied - dense_a.matrix() * &vectors).iter().all(|z| z.norm() <= 1e-12));
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let a = SpinOperator::identity(1).unwrap();
        let b = SpinOperator::identity(2).unwrap();
        assert!(matches!(
            commutator(&a, &b),
            Err(Error::DimensionMismatch { left: 2, right: 4 })
        ));
        assert!(anticommutator(&a, &b).is_err());
        assert!(a.checked_add(&b).is_err());
    }

    #[test]
    fn eigendecomposition_of_simple_cases() {
        let z = embed_single(1, 0, PauliAxis::Z).unwrap();
        let eig = hermitian_eigendecomposition(&z, 12).unwrap();
        assert_eq!(eig.eigenvalues, vec![-1.0, 1.0]);

        let x = embed_single(1, 0, PauliAxis::X).unwrap();
        let eig = hermitian_eigendecomposition(&x, 12).unwrap();
        assert_abs_diff_eq!(eig.eigenvalues[0], -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(eig.eigenvalues[1], 1.0, epsilon = 1e-14);
        let v0 = eig.eigenvectors.column(0);
        // (1, -1)/sqrt 2 up to a global phase
        assert_abs_diff_eq!((v0[0] + v0[1]).norm(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(v0[0].norm(), 0.5f64.sqrt(), epsilon = 1e-14);
        let v1 = eig.eigenvectors.column(1);
        assert_abs_diff_eq!((v1[0] - v1[1]).norm(), 0.0, epsilon = 1e-14);
    }

    fn random_hermitian(n_spins: usize, seed: u64, complex: bool) -> SpinOperator {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dim = 1 << n_spins;
        let mut m = DMatrix::<Complex64>::zeros(dim, dim);
        for r in 0..dim {
            for col in r..dim {
                let im = if complex && r != col {
                    rng.random_range(-1.0..1.0)
                } else {
                    0.0
                };
                let v = c(rng.random_range(-1.0..1.0), im);
                m[(r, col)] = v;
                m[(col, r)] = v.conj();
            }
        }
        SpinOperator::from_matrix(n_spins, m).unwrap()
    }

    #[test]
    fn random_hermitian_reconstructs() {
        for (seed, complex) in [(1u64, true), (2, false), (3, true)] {
            let a = random_hermitian(3, seed, complex);
            let eig = hermitian_eigendecomposition(&a, 12).unwrap();
            assert!(eig.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
            let v = &eig.eigenvectors;
            let d = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
                8,
                eig.eigenvalues.iter().map(|&x| c(x, 0.0)),
            ));
            let rebuilt = v * d * v.adjoint();
            assert!(max_entry_diff(&rebuilt, a.matrix()) <= 1e-10);
            let gram = v.adjoint() * v;
            assert!(max_entry_diff(&gram, &DMatrix::identity(8, 8)) <= 1e-10);
            let norm = a.frobenius_norm();
            for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
                let col = v.column(k);
                let res = (a.matrix() * col - col * c(lambda, 0.0)).norm();
                assert!(res <= 1e-10 * norm);
            }
        }
    }

    #[test]
    fn eigendecomposition_rejects_bad_input() {
        let mut m = DMatrix::<Complex64>::zeros(2, 2);
        m[(0, 1)] = ONE;
        let a = SpinOperator::from_matrix(1, m).unwrap();
        assert!(matches!(
            hermitian_eigendecomposition(&a, 12),
            Err(Error::NonHermitian { .. })
        ));
        let big = SpinOperator::identity(3).unwrap();
        assert_eq!(
            hermitian_eigendecomposition(&big, 2).unwrap_err(),
            Error::DimensionCap { n_spins: 3, cap: 2 }
        );
    }
}
