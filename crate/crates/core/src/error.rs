use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("exponent must satisfy 1 < p < inf, got {0}")]
    InvalidExponent(f64),

    #[error("sequence indices are 1-based, got index 0")]
    ZeroIndex,

    #[error("duplicate sequence index {0}")]
    DuplicateIndex(usize),

    #[error("sequence indices must be strictly increasing (index {0} out of order)")]
    UnorderedIndex(usize),

    #[error("non-finite value {value} at index {index}")]
    NonFinite { index: usize, value: f64 },

    #[error("cannot parse sequence: {0}")]
    Parse(String),

    #[error("exponent mismatch: expected p = {expected}, found p = {found}")]
    ExponentMismatch { expected: f64, found: f64 },

    #[error("every sample was degenerate ({0}); refusing to report an estimate")]
    DegenerateSamples(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("block {index} is the zero vector")]
    ZeroBlock { index: usize },

    #[error("blocks {first} and {second} are not successive disjoint blocks")]
    BlockOrder { first: usize, second: usize },

    #[error("family is not disjointly supported: {0}")]
    NotDisjoint(String),

    #[error("block {index} has norm {norm}, outside the window [{eta}, 1]")]
    SeminormWindow { index: usize, norm: f64, eta: f64 },

    #[error("flattened vector {index} is zero")]
    ZeroFlattened { index: usize },

    #[error("delta must lie in (0, 1/2), got {0}")]
    DeltaOutOfRange(f64),

    #[error("malformed biorthogonal system: {0}")]
    MalformedSystem(String),

    #[error("biorthogonal system failed validation: {0}")]
    ValidationFailed(String),

    #[error("precondition violated{}: {message}", index.map(|i| format!(" at index {i}")).unwrap_or_default())]
    Precondition {
        index: Option<usize>,
        message: String,
    },
}
