use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty seed corpus")]
    EmptyCorpus,

    #[error("malformed document at record {index}: {reason}")]
    MalformedDocument { index: usize, reason: String },

    #[error("unknown class {0:?}")]
    UnknownClass(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("unsupported schema version {found} (expected {expected})")]
    SchemaVersion { found: u64, expected: u64 },

    #[error("truncated file")]
    Truncated,

    #[error("duplicate class key {0:?}")]
    DuplicateClass(String),

    #[error("malformed model file: {0}")]
    ModelFormat(String),

    #[error("empty trace")]
    EmptyTrace,

    #[error("malformed trace record at line {line}: {reason}")]
    MalformedTrace { line: usize, reason: String },

    #[error("timestamps not monotone at line {line}: {timestamp} < {previous}")]
    NonMonotone { line: usize, timestamp: u64, previous: u64 },

    #[error("insufficient mass for Zipf fit")]
    InsufficientZipfMass,

    #[error("model has an empty vocabulary")]
    EmptyVocabulary,

    #[error("model has neither reuse distances nor cold queries")]
    EmptyLocality,

    #[error("unreachable target: all section rates are zero")]
    UnreachableTarget,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("distribution error: {0}")]
    Distribution(String),

    #[error("write failed after {docs_written} documents: {source}")]
    SinkWrite {
        docs_written: u64,
        #[source]
        source: io::Error,
    },

    #[error("synthetic trace too short: covers {covered} sections, model has {required}")]
    TraceTooShort { covered: usize, required: usize },

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    /// True for errors caused by reading or writing files rather than by
    /// their contents.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io(_) | Error::SinkWrite { .. })
    }
}
