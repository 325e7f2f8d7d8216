use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("image decode failed: {0}")]
    Decode(String),

    #[error("image encode failed: {0}")]
    Encode(String),

    #[error("invalid image dimensions {width}x{height} for {len} samples")]
    Dimensions { width: usize, height: usize, len: usize },

    #[error("histogram region is empty after clamping to the image")]
    EmptyRegion,

    #[error("histogram bin counts differ: {left} vs {right}")]
    BinMismatch { left: usize, right: usize },

    #[error("bin count must be in 1..=256, got {0}")]
    BinCount(usize),

    #[error("template window {window_width}x{window_height} exceeds image {width}x{height}")]
    WindowTooLarge {
        window_width: usize,
        window_height: usize,
        width: usize,
        height: usize,
    },

    #[error("template window {0}x{1} must have odd, non-zero sides")]
    EvenWindow(usize, usize),

    #[error("probability maps disagree in size: {0}x{1} vs {2}x{3}")]
    MapSizeMismatch(usize, usize, usize, usize),

    #[error("at least one template is required")]
    NoTemplates,

    #[error("no reference contour was given")]
    NoReferences,

    #[error("gray histogram is empty")]
    EmptyHistogram,

    #[error("binary map contains non-binary value {value} at ({x}, {y})")]
    NotBinary { x: usize, y: usize, value: u8 },

    #[error("region has no foreground pixels")]
    EmptyMoments,

    #[error("similarity {0} is outside [0, 1]")]
    SimilarityOutOfRange(f64),

    #[error("template {path}: {reason}")]
    TemplateLoad { path: PathBuf, reason: String },

    #[error("reference contour image {path}: {reason}")]
    Reference { path: PathBuf, reason: String },

    #[error("config key `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
