use std::io;
use thiserror::Error;

/// Errors produced by graph construction, file I/O, and the performance model.
#[derive(Debug, Error)]
pub enum DigcError {
    #[error("dimension mismatch: {context}: {left} vs {right}")]
    DimensionMismatch {
        context: &'static str,
        left: String,
        right: String,
    },

    #[error("k*d exceeds M: k={k} d={d} M={m}")]
    KdExceedsM { k: usize, d: usize, m: usize },

    #[error("non-finite value at index {at}: {value}")]
    NonFinite { at: usize, value: f32 },

    #[error("bad magic: expected \"DIGC\"")]
    BadMagic,

    #[error("unsupported file version {0}")]
    UnsupportedVersion(u16),

    #[error("unsupported dtype code {0}")]
    UnsupportedDtype(u16),

    #[error("truncated file: expected {expected} bytes of payload, got {got}")]
    Truncated { expected: u64, got: u64 },

    #[error("unknown preset {0:?}")]
    UnknownPreset(String),

    #[error("illegal resolution {h}x{w} for preset: {reason}")]
    IllegalResolution { h: usize, w: usize, reason: String },

    #[error("grid {grid_h}x{grid_w} not divisible by pooling factor {r}")]
    IndivisibleGrid {
        grid_h: usize,
        grid_w: usize,
        r: usize,
    },

    #[error("no input streams to merge")]
    EmptyStreams,

    #[error("empty candidate list")]
    EmptyCandidates,

    #[error("invalid partition plan: {0}")]
    InvalidPlan(String),

    #[error("pipeline worker failure: {0}")]
    WorkerFailure(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T> = std::result::Result<T, DigcError>;
