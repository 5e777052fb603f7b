//! Single-node reference workloads (sort, grep, word count, Naive Bayes,
//! linear SVM) and a harness that measures their data-processing rate on
//! real and synthetic inputs.

pub mod bench;
pub mod classify;
mod error;
pub mod grep;
mod lines;
pub mod rate;
pub mod sort;
pub mod wordcount;

pub use error::{Error, Result};
pub use rate::{data_processing_rate, Summary, Workload, WorkloadResult};
