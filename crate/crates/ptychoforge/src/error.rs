//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {message}")]
    InvalidParameter { field: &'static str, message: String },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("patch footprint out of bounds at center ({x}, {y})")]
    PatchOutOfBounds { x: f64, y: f64 },

    #[error("zero-energy input: {0}")]
    ZeroEnergy(String),

    #[error("reconstruction diverged at iteration {0}")]
    Diverged(usize),

    #[error("empty frequency ring at index {0}; ring width too fine")]
    EmptyRing(usize),

    #[error("degenerate mask: {0}")]
    DegenerateMask(String),

    #[error("unrecognized format version `{found}`")]
    VersionMismatch { found: String },

    #[error("checksum failure in archive member `{member}`")]
    Checksum { member: String },

    #[error("archive structure error: {0}")]
    Archive(String),

    #[error("dimension inconsistency: {0}")]
    DimensionInconsistency(String),

    #[error("missing archive member `{0}`")]
    MissingMember(String),

    #[error("validation failure: {0}")]
    Validation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
