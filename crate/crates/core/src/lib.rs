//! Conserved charges of spin-1/2 Richardson-Gaudin models, the closed set of
//! quadratic relations between them, and the eigenvalue-based Bethe equations
//! those relations produce.
//!
//! The pipeline is
//!
//! 1. [`ModelSpec`]: fields `B_i^a` and couplings `G_ij^a`, certified by
//!    [`check_integrability_algebraic`];
//! 2. [`derive_coefficients`]: the [`QuadraticSystem`]
//!    `R_i^2 = sum_{j != i} C_ij R_j + K_i`;
//! 3. [`solve_all_homotopy`]: every real solution of the scalar version of
//!    that system, one per joint eigenstate;
//! 4. [`joint_spectrum`] and [`match_spectra`]: exact diagonalization as an
//!    independent check.

pub mod bethe_solver;
pub mod catalog;
pub mod ed_oracle;
pub mod error;
pub mod model;
pub mod pauli_ops;
pub mod quad_relations;

pub use bethe_solver::{
    dedupe, newton_solve, residual_and_jacobian, solve_all_homotopy, solve_all_multistart,
    EigenvalueTuple, HomotopyOptions, MultistartOptions, NewtonOptions, SolutionSet,
};
pub use catalog::CatalogParams;
pub use ed_oracle::{joint_spectrum, match_spectra, MatchReport, OracleOptions, SpectrumTable};
pub use error::{Error, Result};
pub use model::{
    build_charge, check_commutators_numerical, check_integrability_algebraic, scale_coupling,
    IntegrabilityReport, ModelSpec,
};
pub use pauli_ops::{PauliAxis, SpinOperator, DEFAULT_SPIN_CAP};
pub use quad_relations::{derive_coefficients, QuadraticSystem};
