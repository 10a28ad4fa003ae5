use std::io;
use std::path::PathBuf;

use thiserror::Error;

/// Everything that can go wrong between reading a WAV file and writing a report.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: expected 2 channels, found {channels}")]
    NotStereo { path: PathBuf, channels: u16 },

    #[error("{path}: sample rate {rate} Hz is not supported (expected 48000 Hz, pass --any-rate to override)")]
    UnsupportedRate { path: PathBuf, rate: u32 },

    #[error("{path}: unsupported encoding: {detail}")]
    UnsupportedEncoding { path: PathBuf, detail: String },

    #[error("{path}: corrupt file: {detail}")]
    CorruptFile { path: PathBuf, detail: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("cannot write {path}: {source}")]
    Output {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("invalid stereo buffer: {0}")]
    InvalidBuffer(String),

    #[error("sample rate mismatch: reference {reference} Hz, test signal {test} Hz")]
    RateMismatch { reference: u32, test: u32 },

    #[error("input has {len} samples, fewer than one block of {block}")]
    InputTooShort { len: usize, block: usize },

    #[error("invalid analysis configuration: {0}")]
    InvalidConfig(String),

    #[error("band partition infeasible: band {band} contains no frequency bins")]
    InfeasiblePartition { band: usize },

    #[error("band subset is empty")]
    EmptySubset,

    #[error("band {band} out of range (partition has {bands} bands)")]
    BandOutOfRange { band: usize, bands: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("maps were computed with different parameters: {0}")]
    ParameterMismatch(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("bad interval [{t0}, {t1}] s for a signal of {duration} s")]
    BadInterval { t0: f64, t1: f64, duration: f64 },

    #[error("malformed manifest: {0}")]
    Manifest(String),

    #[error("malformed map file: {0}")]
    MapFormat(String),
}

impl Error {
    /// Process exit code for this error class: 2 usage, 3 input format,
    /// 4 rate/shape mismatch, 5 internal.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidConfig(_)
            | Error::InfeasiblePartition { .. }
            | Error::EmptySubset
            | Error::BandOutOfRange { .. }
            | Error::BadInterval { .. } => 2,
            Error::NotStereo { .. }
            | Error::UnsupportedRate { .. }
            | Error::UnsupportedEncoding { .. }
            | Error::CorruptFile { .. }
            | Error::Io { .. }
            | Error::InvalidBuffer(_)
            | Error::InputTooShort { .. }
            | Error::Manifest(_)
            | Error::MapFormat(_) => 3,
            Error::RateMismatch { .. } | Error::ShapeMismatch(_) | Error::ParameterMismatch(_) => 4,
            Error::Output { .. } | Error::DegenerateInput(_) => 5,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
