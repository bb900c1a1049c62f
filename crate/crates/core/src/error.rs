use thiserror::Error;

/// Every failure the codec can report.
///
/// Variants are grouped roughly by layer: tensor/shape problems, entropy
/// coding problems, and container/weight-file format problems.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("shape error: {0}")]
    Shape(String),

    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("decode error: {0}")]
    Decode(String),

    #[error("bad magic: expected {expected:?}, found {found:?}")]
    BadMagic { expected: [u8; 4], found: Vec<u8> },

    #[error("unsupported version {0}")]
    UnsupportedVersion(u8),

    #[error("truncated stream: {0}")]
    TruncatedStream(String),

    #[error("malformed data: {0}")]
    Format(String),

    #[error("checksum mismatch: stored {stored:#010x}, computed {computed:#010x}")]
    ChecksumMismatch { stored: u32, computed: u32 },

    #[error("duplicate tensor name `{0}`")]
    DuplicateName(String),

    #[error("missing parameter `{0}`")]
    MissingParameter(String),

    #[error("model mismatch: stream was coded with model {stream:#018x}, weights are {weights:#018x}")]
    ModelMismatch { stream: u64, weights: u64 },

    #[error("image too small for MS-SSIM: {width}x{height}, need at least {min}x{min}")]
    MinSize { width: usize, height: usize, min: usize },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn shape_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Shape(msg.into()))
}
