//! Labeled text corpora: learning class, word and length statistics from a
//! seed, and expanding them into synthetic corpora of any size.

mod gen;
mod model;

pub use gen::{
    generate_corpus, generate_with, CorpusSampler, GenerationSpec, GenerationSummary, OutputOptions, Target,
    DEFAULT_CHUNK_SIZE,
};
pub use model::{analyze_corpus, analyze_corpus_reader, ClassStats, CorpusAnalyzer, CorpusModel};
