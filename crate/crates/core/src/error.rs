use crate::ring::RingDescriptor;

/// Errors produced anywhere in the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("ring mismatch: {0} vs {1}")]
    RingMismatch(RingDescriptor, RingDescriptor),

    #[error("rank requires a field, got {0}")]
    NotAField(RingDescriptor),

    #[error("invalid modulus {0}: must be at least 2")]
    InvalidModulus(u64),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("not an invariant: {0}")]
    NotInvariant(String),

    #[error("construction failure: {0}")]
    Construction(String),

    #[error("incompatible prescription: {0}")]
    Incompatible(String),

    #[error("not in the span: {0}")]
    NotInSpan(String),

    #[error("size cap exceeded: dimension {size} > cap {cap} (use --unsafe-large to override)")]
    SizeCap { size: usize, cap: usize },

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
