use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("basis mismatch: {0}")]
    BasisMismatch(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("malformed input: {0}")]
    Malformed(String),

    #[error("state is not normalized (norm² = {0})")]
    NotNormalized(f64),

    #[error("operator is not involutory (‖A² − I‖ = {0:e})")]
    NotInvolutory(f64),

    #[error("operator is not Hermitian (‖A − A†‖ = {0:e})")]
    NotHermitian(f64),

    #[error("post-selected state is orthogonal to the pre-selected state (|overlap| = {0:e})")]
    OrthogonalPostselection(f64),

    #[error("pointer readout radius {0} exceeds 1: no real weak value")]
    NoRealRoot(f64),

    #[error("coupling strength is zero: the pointer carries no information")]
    ZeroCoupling,

    #[error("coupling |γ| = {0} must be below π/2")]
    CouplingOutOfRange(f64),

    #[error("zero total intensity in the {0} pointer basis")]
    ZeroIntensity(&'static str),

    #[error("post-selection probabilities {0} + {1} do not sum to 1")]
    InconsistentProbabilities(f64, f64),

    #[error("weak value has a non-negligible imaginary part ({0:e})")]
    ComplexWeakValue(f64),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("line {line}: {message} (column {column})")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("all {0} shots were rejected during weak-value estimation")]
    AllShotsRejected(usize),
}
