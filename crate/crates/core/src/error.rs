use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// WAV input rejected; `field` names the offending header field.
    #[error("unsupported wav format ({field}): {detail}")]
    WavFormat { field: &'static str, detail: String },

    #[error("input shorter than one frame: {len} samples < frame length {frame_len}")]
    EmptyInput { len: usize, frame_len: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("too few frames to estimate a model: {count} (need at least 2)")]
    TooFewFrames { count: usize },

    #[error("degenerate model: covariance is not positive definite")]
    DegenerateModel,

    #[error("matrix is not positive definite even after diagonal loading")]
    NotPositiveDefinite,

    #[error("duplicate speaker id {0:?}")]
    DuplicateSpeaker(String),

    #[error("speaker registry is empty")]
    EmptyRegistry,

    #[error("{path}:{line}: {msg}")]
    Parse { path: String, line: usize, msg: String },

    #[error("alignment kernel [{start}, {end}] for {label:?} outside track of {track_len} frames")]
    KernelOutOfBounds {
        label: String,
        start: usize,
        end: usize,
        track_len: usize,
    },

    #[error("unknown selector {0:?}")]
    UnknownSelector(String),

    #[error("unknown label {0:?}")]
    UnknownLabel(String),

    #[error("invalid taxonomy: {0}")]
    Taxonomy(String),

    #[error("insufficient material for speaker {speaker:?}: {available} frames, need {needed} ({what})")]
    InsufficientMaterial {
        speaker: String,
        available: usize,
        needed: usize,
        what: String,
    },

    #[error("need at least 2 speakers, got {0}")]
    TooFewSpeakers(usize),

    #[error("missing alignment for speaker {speaker:?}, sentence {sentence}")]
    MissingAlignment { speaker: String, sentence: usize },

    #[error("no results to score")]
    EmptyResults,

    #[error("unknown report format {0:?}")]
    UnknownFormat(String),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by the data rather than by how the tool was invoked.
    pub fn is_data_error(&self) -> bool {
        !matches!(
            self,
            Error::Config(_) | Error::UnknownFormat(_) | Error::UnknownSelector(_)
        )
    }
}
