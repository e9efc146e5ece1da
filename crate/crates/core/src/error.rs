use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// A violated [`StftConfig`](crate::StftConfig) invariant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("window_length must be at least 2")]
    WindowTooShort,
    #[error("hop must be positive")]
    ZeroHop,
    #[error("sample_rate must be positive")]
    ZeroSampleRate,
    #[error("hop ({hop}) exceeds window_length ({window_length})")]
    HopExceedsWindow { hop: usize, window_length: usize },
    #[error("fft_length ({fft_length}) is shorter than window_length ({window_length})")]
    FftShorterThanWindow {
        fft_length: usize,
        window_length: usize,
    },
    #[error("fft_length ({0}) must be even")]
    OddFftLength(usize),
    #[error("window_length ({window_length}) is not a multiple of hop ({hop})")]
    WindowNotMultipleOfHop { window_length: usize, hop: usize },
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid STFT configuration: {0}")]
    Config(#[from] ConfigError),
    #[error("shape mismatch: expected {expected:?}, got {actual:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        actual: (usize, usize),
    },
    #[error("degenerate window: squared-window overlap sum vanishes at index {index}")]
    DegenerateWindow { index: usize },
    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },
    #[error("truncated payload: expected {expected} bytes, found {actual}")]
    TruncatedPayload { expected: usize, actual: usize },
    #[error("wav error in {path}: {source}")]
    Wav {
        path: PathBuf,
        #[source]
        source: hound::Error,
    },
    #[error("unsupported wav format in {path}: {reason}")]
    UnsupportedWav { path: PathBuf, reason: String },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
