use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum IgnError {
    #[error("shape mismatch at {layer}: expected {expected}, got {got}")]
    ShapeMismatch {
        layer: String,
        expected: String,
        got: String,
    },

    #[error("loss must be a scalar, got shape {0}")]
    NonScalarLoss(String),

    #[error("unsupported resolution {got}; supported: {supported}")]
    UnsupportedResolution { got: usize, supported: String },

    #[error("non-finite value produced by {context}")]
    NonFinite { context: String },

    #[error("loss is NaN at step {step}; diagnostics:\n{dump}")]
    NanLoss { step: u64, dump: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("unknown config key `{key}` in section [{section}]")]
    UnknownKey { section: String, key: String },

    #[error("corrupt data at byte offset {offset}: {what}")]
    Corrupt { offset: u64, what: String },

    #[error("checkpoint architecture mismatch: checkpoint has `{found}`, requested `{requested}`")]
    ArchMismatch { found: String, requested: String },

    #[error("finite space too large: {n} points (limit {limit}); use a sampled variant instead")]
    SpaceTooLarge { n: usize, limit: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("image error: {0}")]
    Image(#[from] image::ImageError),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, IgnError>;
