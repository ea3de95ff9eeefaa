use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A point does not have the shape its descriptor requires.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// Two objects live over structurally different target spaces.
    #[error("incompatible metric space descriptors")]
    IncompatibleSpaces,

    /// A descriptor parameter is out of range.
    #[error("invalid descriptor: {0}")]
    InvalidDescriptor(String),

    /// A weight vector is not a probability vector.
    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    /// Marginals of a transport problem carry different total mass.
    #[error("infeasible marginals: row mass {row} vs column mass {col}")]
    InfeasibleMarginals { row: f64, col: f64 },

    /// A matrix is not a coupling of the required marginals.
    #[error("invalid coupling: {0}")]
    InvalidCoupling(String),

    /// The operation needs geodesics the target space does not provide.
    #[error("space has no supported geodesics: {0}")]
    NonGeodesicSpace(String),

    /// Instance exceeds a configured size limit.
    #[error("size {size} exceeds cap {cap}")]
    SizeCap { size: usize, cap: usize },

    /// A set that must be nonempty was empty.
    #[error("empty input: {0}")]
    Empty(String),

    /// Any other out-of-range argument.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Malformed serialized input.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
