use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value violates its documented invariant.
    #[error("configuration error: {0}")]
    Config(String),
    /// Input data has the wrong shape, range or length.
    #[error("invalid input: {0}")]
    Input(String),
    /// A non-finite value appeared during a numeric computation.
    #[error("non-finite value produced by {0}")]
    Numeric(&'static str),
    #[error("internal error: {0}")]
    Internal(String),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Errors raised while decoding `ETD1` datasets or `ECN1` checkpoints.
#[derive(Debug, Error)]
pub enum FormatError {
    #[error("bad magic: expected {expected:?}, found {found:?}")]
    BadMagic { expected: [u8; 4], found: [u8; 4] },
    #[error("unsupported format version {0}")]
    UnsupportedVersion(u8),
    #[error("truncated file: {0}")]
    Truncated(String),
    #[error("trial {trial}: label {label} is not below class count {classes}")]
    LabelOutOfRange { trial: usize, label: u32, classes: u32 },
    #[error("trial {trial}: non-finite sample at channel {channel}, index {sample}")]
    NonFinite { trial: usize, channel: usize, sample: usize },
    #[error("invalid header: {0}")]
    InvalidHeader(String),
    #[error("trailing bytes after payload ({0} bytes)")]
    TrailingBytes(usize),
}
