use thiserror::Error;

/// Errors produced by the analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("dimension {n} exceeds the supported maximum {max}")]
    DimensionExceeded { n: usize, max: usize },

    #[error("operation requires dimension {expected}, got {got}")]
    DimensionUnsupported { expected: String, got: usize },

    #[error("pivot limit of {0} exceeded")]
    PivotLimitExceeded(usize),

    #[error("principal minor for index set {0} vanishes")]
    DegenerateIndex(String),

    #[error("matrix is not R0 (witness index set {0})")]
    NotR0(String),

    #[error("no admissible probe found after {0} attempts")]
    ProbeExhausted(usize),

    #[error("pivot block for index set {0} is singular")]
    SingularPivotBlock(String),

    #[error("scale vector must be strictly positive")]
    NonpositiveScale,

    #[error("matrix is not LCP-stable")]
    UnstableMatrix,

    #[error("state matrix A is singular")]
    SingularA,

    #[error("input matrix B is singular")]
    SingularB,

    #[error("matrix D is not a P-matrix")]
    NotPMatrix,

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("non-finite entry in {0}")]
    NonFinite(String),
}

pub type Result<T> = std::result::Result<T, Error>;
