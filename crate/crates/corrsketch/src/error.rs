//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// Malformed header or record in a stream file.
    #[error("line {line}: {message}")]
    Format { line: u64, message: String },

    /// A pair whose symbol falls outside `[1, n]`.
    #[error("line {line}: symbol {symbol} outside [1, {n}]")]
    OutOfBounds { line: u64, symbol: u64, n: u32 },

    /// Fewer or more records than the header declared.
    #[error("stream length mismatch: header declares {declared} records, found {found}")]
    LengthMismatch { declared: u64, found: u64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An estimate was requested from a sketch or table that saw no pairs.
    #[error("empty stream: no pairs ingested")]
    EmptyStream,

    /// Merging sketches whose hash functions or shapes differ.
    #[error("incompatible sketches: {0}")]
    IncompatibleSketches(&'static str),

    /// Multiplicative error against a zero or negative reference is undefined.
    #[error("reference value must be positive, got {0}")]
    UndefinedReference(f64),

    /// The exact table would exceed the configured alphabet cap.
    #[error("alphabet size {n} exceeds the exact-table cap {cap}; raise the cap explicitly")]
    TableTooLarge { n: u32, cap: u32 },
}

pub type Result<T> = std::result::Result<T, Error>;
