use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: zero valid rows")]
    EmptyCatalog { path: PathBuf },

    #[error("{path}:{line}: {reason}")]
    Parse { path: PathBuf, line: usize, reason: String },

    #[error("{path}:{line}: vector for `{id}` has dimension {found}, expected {expected}")]
    DimensionMismatch {
        path: PathBuf,
        line: usize,
        id: String,
        expected: usize,
        found: usize,
    },

    #[error("{path}:{line}: non-finite value in vector for `{id}`")]
    NonFiniteVector { path: PathBuf, line: usize, id: String },

    #[error("no feature vector for item `{0}`")]
    MissingFeature(String),

    #[error("unknown item `{0}`")]
    UnknownItem(String),

    #[error("item `{0}` is alone in its category; no similar item available")]
    NoSimilar(String),

    #[error("could not sample a negative for anchor `{anchor}` after {attempts} attempts")]
    NoNegative { anchor: String, attempts: usize },

    #[error("no quadruplets produced")]
    NoQuadruplets,

    #[error("split needs at least 2 distinct anchors, found {0}")]
    TooFewAnchors(usize),

    #[error("split fraction {fraction} over {anchors} anchors leaves a side empty")]
    EmptySplit { fraction: f64, anchors: usize },

    #[error("shape mismatch: expected {expected}, found {found}")]
    Shape { expected: String, found: String },

    #[error("degenerate projection (norm below threshold)")]
    DegenerateProjection,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("non-finite {what} in batch {batch} of epoch {epoch}")]
    NonFinite {
        what: &'static str,
        epoch: usize,
        batch: usize,
    },

    #[error("checkpoint {path}: unsupported version {found} (expected {expected})")]
    CheckpointVersion { path: PathBuf, found: u32, expected: u32 },

    #[error("checkpoint {path} is corrupt: {reason}")]
    CorruptCheckpoint { path: PathBuf, reason: String },

    #[error("empty evaluation set")]
    EmptyEvalSet,

    #[error("embedding index is empty")]
    EmptyIndex,

    #[error("cannot serialize: {0}")]
    Serialize(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures of the numerics (non-finite values, degenerate
    /// geometry) as opposed to bad input data.
    pub fn is_numeric(&self) -> bool {
        matches!(self, Error::NonFinite { .. } | Error::DegenerateProjection)
    }
}
