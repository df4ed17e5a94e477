use thiserror::Error;

use crate::galois::ValidationReport;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("inconsistent Galois spec at p = {prime}: {detail}")]
    InconsistentSpec { prime: u64, detail: String },

    #[error("invalid Galois spec: {0}")]
    InvalidSpec(ValidationReport),

    #[error("unsupported character: {0}")]
    UnsupportedCharacter(String),

    #[error("unsupported instantiation: {0}")]
    UnsupportedInstantiation(String),

    #[error("degenerate alpha: {0}")]
    DegenerateAlpha(String),

    #[error("resource limit: {0}")]
    ResourceLimit(String),

    #[error("no certificate found with p, q <= {limit}")]
    NotFoundWithinLimit { limit: u64 },

    #[error("invalid instance: {0}")]
    Validation(String),

    #[error("bad cache file: {0}")]
    Cache(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
