use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("rank {rank} out of range for C({m},{k}) = {count}")]
    RankOutOfRange {
        m: usize,
        k: usize,
        rank: u128,
        count: u128,
    },

    #[error("enumeration of C({m},{k}) = {count} outcomes exceeds the cap of {cap}")]
    EnumerationTooLarge {
        m: usize,
        k: usize,
        count: u128,
        cap: u128,
    },

    #[error("outcome {0} has its last mode occupied")]
    InE1(String),

    #[error("invalid outcome: {0}")]
    InvalidOutcome(String),

    #[error("cannot embed a {from}-mode unitary into {to} modes")]
    ShrinkNotAllowed { from: usize, to: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not unitary (max |U^dag U - I| = {deviation:e})")]
    NotUnitary { deviation: f64 },

    #[error("permanent of a {size}x{size} matrix exceeds the exact limit of {limit}")]
    MatrixTooLarge { size: usize, limit: usize },

    #[error("expectation value has imaginary part {imag:e}")]
    NonRealExpectation { real: f64, imag: f64 },

    #[error("model uses a fixed unitary and has no trainable parameters")]
    FixedUnitaryHasNoGradient,

    #[error("C({m},{k}) = {count} outcomes do not fit into {n} bits")]
    CodomainTooSmall {
        m: usize,
        k: usize,
        n: usize,
        count: u128,
    },

    #[error("size precondition violated: {0}")]
    SizePreconditionViolated(String),

    #[error("readout value {0} has no preimage")]
    EmptyPreimage(String),

    #[error("infeasible tower base: {0}")]
    InfeasibleBase(String),

    #[error("bit length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("outcome space of {bits} bits is too large for exact evaluation (limit {limit})")]
    SpaceTooLarge { bits: usize, limit: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
