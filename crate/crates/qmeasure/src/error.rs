//! Error type shared by all modules of the crate.

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("matrix is not hermitian (max |a[i][j] - conj(a[j][i])| = {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not unitary (|U*U - I| = {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    #[error("matrix is not a projector: {detail}")]
    NotProjector { detail: String },

    #[error("matrix is not a density matrix: {detail}")]
    NotDensityMatrix { detail: String },

    #[error("state vector is not normalized (sum |c_r|^2 = {norm_sq})")]
    NotNormalized { norm_sq: f64 },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("eigensolver failed to converge: {detail}")]
    EigenFailure { detail: String },

    #[error("coefficient tensor violates {condition}: {detail}")]
    TensorCondition { condition: &'static str, detail: String },

    #[error("conditioning on null macrostate {index} (weight {weight:.3e})")]
    NullMacrostate { index: usize, weight: f64 },

    #[error("ambiguous pointer: level {level} has tied macrostate weights")]
    AmbiguousPointer { level: usize },

    #[error("pointer map is not bijective")]
    NonBijectivePointer,

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("no rational with denominator <= {max_denominator} lies in bin {bin}; increase the denominator bound")]
    NoAdmissibleRational { bin: usize, max_denominator: i64 },

    #[error("operator spectrum [{lo}, {hi}] escapes the declared range [{a}, {b}]")]
    SpectrumOutOfRange { lo: f64, hi: f64, a: f64, b: f64 },

    #[error("not enough data points: need {needed}, found {found}")]
    InsufficientData { needed: usize, found: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
