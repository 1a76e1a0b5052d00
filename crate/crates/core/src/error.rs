//! Error types for each pipeline stage.

use thiserror::Error;

/// Errors from audio ingestion, emission, and framing.
#[derive(Error, Debug)]
pub enum AudioError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed wav: {0}")]
    Format(String),
    #[error("unsupported encoding: {0}")]
    UnsupportedEncoding(String),
    #[error("sample rate {found} Hz, expected {expected} Hz")]
    RateMismatch { found: u32, expected: u32 },
    #[error("non-finite sample at index {0}")]
    NonFinite(usize),
}

/// Errors from mixture synthesis and dataset generation.
#[derive(Error, Debug)]
pub enum MixError {
    #[error("degenerate source: zero energy over the overlap region")]
    DegenerateSource,
    #[error("invalid mixture spec: {0}")]
    InvalidSpec(String),
    #[error("corpus too small: requested {requested_s:.1}s for split '{split}', corpus supports at most {available_s:.1}s")]
    Capacity {
        split: String,
        requested_s: f64,
        available_s: f64,
    },
    #[error("corpus error: {0}")]
    Corpus(String),
    #[error(transparent)]
    Audio(#[from] AudioError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Errors from feature extraction.
#[derive(Error, Debug)]
pub enum FeatureError {
    #[error("input too short: {len} samples, need at least {min}")]
    TooShort { len: usize, min: usize },
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("empty feature stream")]
    EmptyStream,
    #[error("malformed feature file: {0}")]
    Format(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Errors from the classifier, training, and checkpointing.
#[derive(Error, Debug)]
pub enum CnnError {
    #[error("bad input shape: {0}")]
    Shape(String),
    #[error("bad configuration: {0}")]
    Config(String),
    #[error("corrupt checkpoint: {0}")]
    Checksum(String),
    #[error("incompatible checkpoint: {0}")]
    Incompatible(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Errors from metric and curve computation.
#[derive(Error, Debug)]
pub enum MetricError {
    #[error("length mismatch: {pred} predictions vs {truth} labels")]
    LengthMismatch { pred: usize, truth: usize },
    #[error("single-class truth: need at least one positive and one negative")]
    SingleClass,
    #[error("no positive labels")]
    NoPositives,
}
