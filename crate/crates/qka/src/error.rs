use thiserror::Error;

/// Errors raised by simulation and analysis operations.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum QkaError {
    #[error("state is not normalized (|amplitudes|² sums to {norm_sq})")]
    NotNormalized { norm_sq: f64 },

    #[error("amplitude is not finite")]
    NonFiniteAmplitude,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    #[error("decoy record does not match frame: {0}")]
    RecordMismatch(String),

    #[error("measurement requested before all rings completed ({incomplete} of {total} still in transit)")]
    EarlyMeasureRejected { incomplete: usize, total: usize },

    #[error("unsupported scenario: {0}")]
    Unsupported(String),

    #[error("efficiency undefined: qubit and classical-bit counts are both zero")]
    DivisionByZero,
}
