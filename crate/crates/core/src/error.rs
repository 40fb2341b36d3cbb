use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid SH degree: n = {n}, m = {m}")]
    InvalidDegree { n: i64, m: i64 },

    #[error("invalid direction: {0}")]
    InvalidDirection(String),

    #[error("order {requested} exceeds the exact order {exact} of the quadrature grid (aliasing risk)")]
    AliasingRisk { requested: usize, exact: usize },

    #[error("cannot truncate order {from} coefficients to order {to}")]
    InvalidTruncation { from: usize, to: usize },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("invalid room: {0}")]
    InvalidRoom(String),

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("image at {delay:.6} s does not fit in a {length:.6} s response")]
    Truncation { delay: f64, length: f64 },

    #[error("DRR undefined: reverberant energy is zero")]
    UndefinedDrr,

    #[error("insufficient length: {0}")]
    InsufficientLength(String),

    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("unsupported sample rate {0} Hz")]
    UnsupportedSampleRate(u32),

    #[error("insufficient directions: order needs {needed}, set has {got}")]
    InsufficientDirections { needed: usize, got: usize },

    #[error("requested order {requested} exceeds available order {available}")]
    OrderMismatch { requested: usize, available: usize },

    #[error("sample rate mismatch: {0} Hz vs {1} Hz")]
    SampleRateMismatch(u32, u32),

    #[error("zero-energy input: {0}")]
    ZeroEnergy(String),

    #[error("invalid duration: {0}")]
    InvalidDuration(String),

    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),

    #[error("invalid signal: {0}")]
    InvalidSignal(String),

    #[error("least-squares system is singular")]
    Singular,

    #[error(transparent)]
    Io(#[from] io::Error),
}
