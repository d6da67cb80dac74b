use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, TedError>;

#[derive(Debug, Error)]
pub enum TedError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),

    #[error("malformed header: {0}")]
    MalformedHeader(String),

    #[error("payload size mismatch: dims require {expected} labels, found {found}")]
    PayloadSize { expected: usize, found: usize },

    #[error("unsupported dtype `{0}` (only u32 is supported)")]
    UnsupportedDtype(String),

    #[error("malformed text grid: {0}")]
    MalformedGrid(String),

    #[error("invalid volume: {0}")]
    InvalidVolume(String),

    #[error("dimension mismatch: {0:?} vs {1:?}")]
    DimensionMismatch([usize; 3], [usize; 3]),

    #[error("resolution mismatch: {0:?} vs {1:?}")]
    ResolutionMismatch([f64; 3], [f64; 3]),

    #[error("location {index} out of range for {len} locations")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("label {0} does not occur in the volume")]
    LabelAbsent(u32),

    #[error("region {0} has an invalid candidate set: {1}")]
    InvalidRegion(usize, String),

    #[error("proposal label {0} is not the original label of any region")]
    MissingPropLabel(u32),

    #[error("instance has {size} assignments, exceeding the enumeration cap of {cap}")]
    EnumerationCap { size: u128, cap: u128 },

    #[error("need at least {needed} evaluated locations, found {found}")]
    TooFewLocations { needed: usize, found: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("generator failed: {0}")]
    Generator(String),
}
