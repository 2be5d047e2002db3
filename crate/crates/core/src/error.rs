use thiserror::Error;

/// Errors raised by the watermark channel.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid dimension {dim}: {reason}")]
    InvalidDimension { dim: usize, reason: &'static str },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("message of {message_bits} bits exceeds codec capacity of {capacity_bits} bits")]
    CapacityExceeded {
        capacity_bits: usize,
        message_bits: usize,
    },

    #[error("message ends with a NUL byte; trailing zero bytes are reserved for padding")]
    TrailingNul,

    #[error("value out of domain: {0}")]
    Domain(String),

    #[error("vector is not unit norm (norm = {norm})")]
    NotUnitNorm { norm: f64 },

    #[error("image too small: {width}x{height}, need at least {min}x{min}")]
    ImageTooSmall {
        width: usize,
        height: usize,
        min: usize,
    },

    #[error("image shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("unknown transform `{name}`; valid transforms: {valid}")]
    UnknownTransform { name: String, valid: String },

    #[error("invalid transform parameter: {0}")]
    TransformParameter(String),

    #[error("degenerate labels: {0}")]
    DegenerateLabels(&'static str),

    #[error("malformed netpbm data: {0}")]
    Pnm(String),

    #[error("malformed vector encoding: {0}")]
    VectorFormat(String),

    #[error("invalid configuration at {path}: {reason}")]
    Config { path: String, reason: String },

    #[error("invalid key: {0}")]
    Key(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
