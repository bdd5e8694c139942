use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("spin index {index} out of range for {n_spins} spins")]
    IndexOutOfRange { index: usize, n_spins: usize },

    #[error("pair operator needs two distinct spins, got {0} twice")]
    SameSpin(usize),

    #[error("operator dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("expected a vector of length {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("operator is not Hermitian (max |A - A^dagger| = {deviation:e})")]
    NonHermitian { deviation: f64 },

    #[error("{n_spins} spins exceed the dense operator cap of {cap} spins")]
    DimensionCap { n_spins: usize, cap: usize },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid catalog parameters: {0}")]
    InvalidCatalog(String),

    #[error(
        "integrability constraints violated (field residual {max_field_residual:e}, \
         gaudin residual {max_gaudin_residual:e})"
    )]
    IntegrabilityViolation {
        max_field_residual: f64,
        max_gaudin_residual: f64,
    },

    #[error("coefficient C[{i}][{j}] is undetermined: coupling is nonzero but every route has a vanishing denominator")]
    DegenerateCoupling { i: usize, j: usize },

    #[error("routes for C[{i}][{j}] disagree: coupling route {gamma_route}, field route {field_route}")]
    InternalInconsistency {
        i: usize,
        j: usize,
        gamma_route: f64,
        field_route: f64,
    },

    #[error("field on spin {spin} has magnitude {magnitude:e}, below the homotopy startup threshold {threshold:e}")]
    StartupDegenerate {
        spin: usize,
        magnitude: f64,
        threshold: f64,
    },

    #[error("charges do not commute (max commutator norm {max_commutator_norm:e})")]
    NonCommutingFamily { max_commutator_norm: f64 },

    #[error("joint eigenvector residual {residual:e} exceeds tolerance {tolerance:e}")]
    OracleResidual { residual: f64, tolerance: f64 },
}
