use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("ambient dimension must be at least 1")]
    ZeroDimension,

    #[error("invalid shuffle {0:?}: entries must be strictly increasing and in range")]
    InvalidShuffle(Vec<usize>),

    #[error("box caps must align with capped coordinates ({coords} coordinates, {caps} caps)")]
    CapArity { coords: usize, caps: usize },

    #[error("cannot intersect an empty family of boxes")]
    EmptyFamily,

    #[error("index {index} out of range (size {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("shuffle size {q} exceeds set size {k}")]
    ShuffleTooLarge { q: usize, k: usize },

    #[error("truncation cutoff must be at least 1")]
    ZeroCutoff,

    #[error("a monomial ideal needs at least one generator")]
    NoGenerators,

    #[error("unit ideal: the constant monomial lies in the ideal, so there is no proper quotient")]
    UnitIdeal,

    #[error("level {level} out of range (complex has {k} boxes)")]
    LevelOutOfRange { level: usize, k: usize },

    #[error("coordinate {coord} out of range for ambient dimension {m}")]
    CoordinateOutOfRange { coord: usize, m: usize },

    #[error("multi-index {0:?} lies outside the box")]
    OutsideBox(Vec<u32>),

    #[error("multi-index {0:?} lies outside the truncation grid")]
    OutsideTruncation(Vec<u32>),

    #[error("square root of a negative number")]
    NegativeRadicand,

    #[error("radicand too large to normalize exactly")]
    RadicandTooLarge,

    #[error("integer overflow during exact elimination")]
    Overflow,

    #[error("operator shapes do not compose: {0}")]
    ShapeMismatch(String),

    #[error("Schatten exponent must be positive")]
    NonPositiveExponent,

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid selector: {0}")]
    Selector(String),

    #[error("{0}")]
    Io(String),
}
