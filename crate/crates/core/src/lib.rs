//! Learn semantic, locality and timing models from small seeds of real text
//! corpora and query traces, and generate synthetic data of arbitrary size
//! that preserves them.
//!
//! * [`corpus`]: class / word / document-length statistics of a labeled
//!   corpus and a chunked, thread-count-independent corpus generator.
//! * [`trace`]: term frequencies, Zipf fit, terms per query, reuse-distance
//!   histogram and per-section request rates of a query trace, and a
//!   generator that replays them.
//! * [`stats`]: KL divergence, chi-square and KS machinery, and fidelity
//!   reports comparing seed models against synthetic data.

pub mod corpus;
pub mod document;
pub mod error;
pub mod persist;
pub mod rng;
pub mod sampling;
pub mod stats;
pub mod trace;

pub use document::Document;
pub use error::{Error, Result};
