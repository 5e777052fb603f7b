use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use seedgen_core::rng::DEFAULT_SEED;
use seedgen_core::trace::DEFAULT_MIN_FREQ;
use seedgen_workloads::Workload;

use crate::size::parse_size;

const CORPUS_FORMAT: &str = "\
Corpus files hold one document per line: `label<TAB>token token ...`.
Labels are non-empty and contain no tab or newline; tokens are separated
by ASCII whitespace. Unlabeled output (--unlabeled) omits `label<TAB>`.";

const TRACE_FORMAT: &str = "\
Trace files hold one request per line: `timestamp_ms<TAB>term term ...`.
Timestamps are non-negative integers in milliseconds and must be
non-decreasing; every request has at least one term.";

const MODEL_FORMAT: &str = "\
Model files are JSON objects with sorted keys and a `schema_version`
field. Integer-keyed maps (length histograms, reuse distances,
terms-per-query) use decimal string keys.";

const EXIT_CODES: &str = "\
Exit status: 0 success or validation pass, 1 validation failure,
2 usage error, 3 I/O error or malformed input file.";

const SIZE_FORMAT: &str = "Sizes accept binary suffixes: 512, 64K, 10M, 1G (1M = 2^20 bytes).";

const WORKLOADS: &str = "\
Workloads: sort, grep, wordcount, naive_bayes, svm. Classifiers hold out
every fifth record (index % 5 == 4) as the test set. Results are printed as
tab-separated rows: workload, bytes, seconds, MB/s (MB = 2^20 bytes),
summary. SEEDGEN_TMPDIR overrides where sort spill files are written.";

#[derive(Debug, Parser)]
#[command(name = "seedgen", version, about = "Analyze seed corpora and query traces, generate synthetic data from their models, validate it, and benchmark workloads")]
#[command(after_help = EXIT_CODES)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Learn class, word and length statistics from a labeled corpus.
    #[command(after_help = format!("{CORPUS_FORMAT}\n\n{MODEL_FORMAT}\n\n{EXIT_CODES}"))]
    AnalyzeCorpus(AnalyzeCorpus),
    /// Generate a synthetic corpus from a corpus model.
    #[command(after_help = format!("{CORPUS_FORMAT}\n\n{MODEL_FORMAT}\n\n{SIZE_FORMAT}\n\n{EXIT_CODES}"))]
    GenCorpus(GenCorpus),
    /// Learn term, locality and timing statistics from a query trace.
    #[command(after_help = format!("{TRACE_FORMAT}\n\n{MODEL_FORMAT}\n\n{EXIT_CODES}"))]
    AnalyzeTrace(AnalyzeTrace),
    /// Generate a synthetic query trace from a trace model.
    #[command(after_help = format!("{TRACE_FORMAT}\n\n{MODEL_FORMAT}\n\n{EXIT_CODES}"))]
    GenTrace(GenTrace),
    /// Compare a corpus against a seed corpus model.
    #[command(after_help = format!("{CORPUS_FORMAT}\n\n{MODEL_FORMAT}\n\n{EXIT_CODES}"))]
    ValidateCorpus(ValidateCorpus),
    /// Compare a query trace against a seed trace model.
    #[command(after_help = format!("{TRACE_FORMAT}\n\n{MODEL_FORMAT}\n\n{EXIT_CODES}"))]
    ValidateTrace(ValidateTrace),
    /// Measure data-processing rates of the reference workloads.
    #[command(subcommand)]
    Bench(Bench),
}

#[derive(Debug, Args)]
pub struct AnalyzeCorpus {
    /// Labeled seed corpus.
    #[arg(long)]
    pub input: PathBuf,
    /// Where to write the model (JSON).
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
#[group(id = "corpus_target", required = true, multiple = false)]
pub struct CorpusTarget {
    /// Number of documents to generate.
    #[arg(long, group = "corpus_target")]
    pub docs: Option<u64>,
    /// Stop after the document that brings the output to this many bytes.
    #[arg(long, group = "corpus_target", value_parser = parse_size)]
    pub bytes: Option<u64>,
}

#[derive(Debug, Args)]
pub struct GenCorpus {
    /// Corpus model written by analyze-corpus.
    #[arg(long)]
    pub model: PathBuf,
    #[command(flatten)]
    pub target: CorpusTarget,
    /// Output corpus file.
    #[arg(long)]
    pub out: PathBuf,
    /// Master seed; the output is a pure function of model, target and seed.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Worker threads; does not change the output bytes.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..=1024))]
    pub threads: u64,
    /// Write documents without their labels.
    #[arg(long)]
    pub unlabeled: bool,
}

#[derive(Debug, Args)]
pub struct AnalyzeTrace {
    /// Seed query trace.
    #[arg(long)]
    pub input: PathBuf,
    /// Where to write the model (JSON).
    #[arg(long)]
    pub out: PathBuf,
    /// Length of the time sections used for request rates, in milliseconds.
    #[arg(long, default_value_t = 60_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub section_ms: u64,
    /// Minimum term frequency included in the Zipf fit.
    #[arg(long, default_value_t = DEFAULT_MIN_FREQ, value_parser = clap::value_parser!(u64).range(1..))]
    pub min_freq: u64,
}

#[derive(Debug, Args)]
#[group(id = "trace_target", required = true, multiple = false)]
pub struct TraceTarget {
    /// Number of requests to generate.
    #[arg(long, group = "trace_target")]
    pub queries: Option<u64>,
    /// Generate requests with timestamps below this many milliseconds.
    #[arg(long, group = "trace_target")]
    pub duration_ms: Option<u64>,
}

#[derive(Debug, Args)]
pub struct GenTrace {
    /// Trace model written by analyze-trace.
    #[arg(long)]
    pub model: PathBuf,
    #[command(flatten)]
    pub target: TraceTarget,
    /// Output trace file.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Multiply every section's request rate by this factor.
    #[arg(long, default_value_t = 1.0)]
    pub rate_scale: f64,
    /// Evenly spaced arrivals instead of Poisson arrivals within sections.
    #[arg(long)]
    pub uniform_arrivals: bool,
}

#[derive(Debug, Args)]
pub struct ValidateCorpus {
    /// Seed corpus model.
    #[arg(long)]
    pub model: PathBuf,
    /// Corpus to check (labeled).
    #[arg(long)]
    pub data: PathBuf,
    /// Minimum chi-square p-value of the class distribution.
    #[arg(long, default_value_t = 0.001)]
    pub class_alpha: f64,
    /// Maximum per-class word KL divergence (synthetic || seed).
    #[arg(long, default_value_t = 0.02)]
    pub word_kl: f64,
    /// Maximum per-class KS distance between document-length distributions.
    #[arg(long, default_value_t = 0.05)]
    pub length_ks: f64,
    /// Also write the report as JSON.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ValidateTrace {
    /// Seed trace model.
    #[arg(long)]
    pub model: PathBuf,
    /// Trace to check.
    #[arg(long)]
    pub data: PathBuf,
    /// Maximum difference of fitted Zipf exponents.
    #[arg(long, default_value_t = 0.1)]
    pub zipf_tolerance: f64,
    /// Maximum KS distance between reuse-distance CDFs.
    #[arg(long, default_value_t = 0.05)]
    pub reuse_ks: f64,
    /// Maximum relative error of each section's request rate.
    #[arg(long, default_value_t = 0.10)]
    pub rate_tolerance: f64,
    /// Rate scale the trace was generated with.
    #[arg(long, default_value_t = 1.0)]
    pub rate_scale: f64,
    /// Duration the trace was generated with; only whole sections are compared.
    #[arg(long)]
    pub duration_ms: Option<u64>,
    /// Minimum term frequency included in the Zipf fit.
    #[arg(long, default_value_t = DEFAULT_MIN_FREQ, value_parser = clap::value_parser!(u64).range(1..))]
    pub min_freq: u64,
    /// Also write the report as JSON.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Bench {
    /// Run workloads once on a corpus file.
    #[command(after_help = format!("{WORKLOADS}\n\n{CORPUS_FORMAT}\n\n{EXIT_CODES}"))]
    Run {
        /// Labeled corpus file.
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        opts: BenchOpts,
    },
    /// Compare mean rates on two equal-size datasets.
    #[command(after_help = format!("{WORKLOADS}\n\nThe deviation column is |rate_a - rate_b| / rate_a. Each workload runs once\nuntimed on both datasets, then each timed repetition alternates passes on A and B\nfor at least --min-secs and reports the median pass per dataset.\n\n{EXIT_CODES}"))]
    Compare {
        /// First (reference) dataset.
        #[arg(long)]
        a: PathBuf,
        /// Second dataset; must be within 1% of the size of A.
        #[arg(long)]
        b: PathBuf,
        /// Timed repetitions per workload and dataset (at least 3).
        #[arg(long, default_value_t = 3)]
        reps: usize,
        /// Minimum length of one timed repetition in seconds. Passes on A
        /// and B alternate until it is reached and each dataset reports
        /// its median pass.
        #[arg(long, default_value_t = 2.0)]
        min_secs: f64,
        #[command(flatten)]
        opts: BenchOpts,
    },
    /// Generate corpora of increasing size from a model and measure each.
    #[command(after_help = format!("{WORKLOADS}\n\n{SIZE_FORMAT}\n\nWith --csv-dir, writes sweep_<workload>.csv (input_bytes,rate_mb_s) per workload.\n\n{EXIT_CODES}"))]
    Sweep {
        /// Corpus model written by analyze-corpus.
        #[arg(long)]
        model: PathBuf,
        /// Strictly ascending volumes, comma separated.
        #[arg(long, value_delimiter = ',', required = true, value_parser = parse_size)]
        volumes: Vec<u64>,
        /// Directory for the generated corpora (each is removed after use).
        #[arg(long)]
        work_dir: PathBuf,
        /// Directory for per-workload CSV files.
        #[arg(long)]
        csv_dir: Option<PathBuf>,
        /// Worker threads for generation.
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..=1024))]
        threads: u64,
        #[command(flatten)]
        opts: BenchOpts,
    },
}

#[derive(Debug, Args)]
pub struct BenchOpts {
    /// Workloads to run, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = Workload::ALL.map(|w| w.to_string()))]
    pub workloads: Vec<String>,
    /// Seeds data generation and the SVM example order.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Sort memory budget.
    #[arg(long, default_value = "256M", value_parser = parse_size)]
    pub memory_budget: u64,
    /// Fixed substring counted by grep.
    #[arg(long, default_value = seedgen_workloads::bench::DEFAULT_GREP_PATTERN)]
    pub pattern: String,
    /// Number of most frequent words reported by wordcount.
    #[arg(long, default_value_t = seedgen_workloads::wordcount::DEFAULT_TOP_K)]
    pub top_k: usize,
    /// SVM training epochs.
    #[arg(long, default_value_t = 5)]
    pub svm_epochs: usize,
    /// SVM regularization strength.
    #[arg(long, default_value_t = 1e-4)]
    pub svm_lambda: f64,
    /// Append result rows to this tab-separated log.
    #[arg(long)]
    pub log: Option<PathBuf>,
}
