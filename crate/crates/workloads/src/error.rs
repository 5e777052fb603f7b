use std::io;
use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("training data has a single class {0:?}; at least two are required")]
    SingleClass(String),
    #[error("training data is empty")]
    NoTrainingData,
    #[error("dataset sizes differ by more than 1%: {a} vs {b} bytes")]
    SizeMismatch { a: u64, b: u64 },
    #[error("spill file write failed in {dir}: {source}")]
    Spill { dir: PathBuf, source: io::Error },
    #[error(transparent)]
    Core(#[from] seedgen_core::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
