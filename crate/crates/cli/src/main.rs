mod args;
mod size;

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::Path;
use std::process::ExitCode;

use clap::Parser;
use seedgen_core::corpus::{analyze_corpus_reader, generate_corpus, CorpusModel, GenerationSpec, OutputOptions};
use seedgen_core::document::DocumentReader;
use seedgen_core::stats::{validate_corpus, validate_trace, CorpusThresholds, TraceThresholds, ValidationReport};
use seedgen_core::trace::{analyze_trace, write_entry, Arrivals, QueryTrace, TraceGenSpec, TraceGenerator, TraceModel};
use seedgen_workloads::bench::{
    append_results_log, bench_compare, bench_sweep, compare_table, results_table, run_workload, sweep_table,
    write_sweep_csvs, BenchConfig, SweepPlan,
};
use seedgen_workloads::classify::SvmParams;
use seedgen_workloads::sort::SortOptions;
use seedgen_workloads::{Workload, WorkloadResult};

use args::{Bench, BenchOpts, Cli, Command};

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_IO: u8 = 3;

/// A failed command: usage errors exit 2, I/O and input-data errors exit 3.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Io(String),
}

impl From<seedgen_core::Error> for Failure {
    fn from(e: seedgen_core::Error) -> Self {
        match e {
            seedgen_core::Error::InvalidArgument(_) | seedgen_core::Error::UnreachableTarget => Failure::Usage(e.to_string()),
            _ => Failure::Io(e.to_string()),
        }
    }
}

impl From<seedgen_workloads::Error> for Failure {
    fn from(e: seedgen_workloads::Error) -> Self {
        use seedgen_workloads::Error as W;
        match e {
            W::InvalidArgument(_) | W::SizeMismatch { .. } => Failure::Usage(e.to_string()),
            W::Core(inner) => inner.into(),
            _ => Failure::Io(e.to_string()),
        }
    }
}

type Outcome = Result<bool, Failure>;

fn io_failure(path: &Path, e: io::Error) -> Failure {
    Failure::Io(format!("{}: {e}", path.display()))
}

fn open(path: &Path) -> Result<BufReader<File>, Failure> {
    File::open(path).map(|f| BufReader::with_capacity(1 << 20, f)).map_err(|e| io_failure(path, e))
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path).map(|f| BufWriter::with_capacity(1 << 20, f)).map_err(|e| io_failure(path, e))
}

fn require_dir(path: &Path) -> Result<(), Failure> {
    if path.is_dir() {
        Ok(())
    } else {
        Err(Failure::Io(format!("{}: not a directory", path.display())))
    }
}

/// Checks that `path` can be created: its parent directory exists.
fn check_output(path: &Path) -> Result<(), Failure> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => require_dir(dir),
        _ => Ok(()),
    }
}

fn finish(path: &Path, mut out: BufWriter<File>) -> Result<(), Failure> {
    out.flush().map_err(|e| io_failure(path, e))
}

fn check_threshold(name: &str, value: f64) -> Result<f64, Failure> {
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(Failure::Usage(format!("--{name} must be a non-negative number")))
    }
}

fn load_corpus_model(path: &Path) -> Result<CorpusModel, Failure> {
    Ok(CorpusModel::load(open(path)?)?)
}

fn load_trace_model(path: &Path) -> Result<TraceModel, Failure> {
    Ok(TraceModel::load(open(path)?)?)
}

fn report(report: &ValidationReport, json: Option<&Path>) -> Outcome {
    println!("{report}");
    if let Some(path) = json {
        let mut out = create(path)?;
        report.write_json(&mut out)?;
        finish(path, out)?;
    }
    Ok(report.pass)
}

fn bench_config(opts: &BenchOpts) -> Result<(Vec<Workload>, BenchConfig), Failure> {
    let workloads = opts
        .workloads
        .iter()
        .map(|w| w.parse::<Workload>())
        .collect::<Result<Vec<_>, _>>()?;
    if workloads.is_empty() {
        return Err(Failure::Usage("no workloads selected".into()));
    }
    let memory_budget = usize::try_from(opts.memory_budget)
        .ok()
        .filter(|&b| b > 0)
        .ok_or_else(|| Failure::Usage("--memory-budget must be positive".into()))?;
    if opts.svm_epochs == 0 || !(opts.svm_lambda.is_finite() && opts.svm_lambda > 0.0) {
        return Err(Failure::Usage("--svm-epochs and --svm-lambda must be positive".into()));
    }
    let cfg = BenchConfig {
        sort: SortOptions::with_budget(memory_budget),
        grep_pattern: opts.pattern.clone(),
        top_k: opts.top_k,
        svm: SvmParams { epochs: opts.svm_epochs, lambda: opts.svm_lambda, seed: opts.seed },
        scratch_dir: None,
        min_repetition_secs: 0.0,
    };
    Ok((workloads, cfg))
}

fn log_results(opts: &BenchOpts, results: &[WorkloadResult]) -> Result<(), Failure> {
    match &opts.log {
        Some(path) => append_results_log(path, results).map_err(|e| io_failure(path, e)),
        None => Ok(()),
    }
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::AnalyzeCorpus(a) => {
            let input = open(&a.input)?;
            check_output(&a.out)?;
            let model = analyze_corpus_reader(input)?;
            let mut out = create(&a.out)?;
            model.save(&mut out)?;
            finish(&a.out, out)?;
            eprintln!("{} documents in {} classes", model.total_docs(), model.classes().len());
            Ok(true)
        }
        Command::GenCorpus(g) => {
            let model = load_corpus_model(&g.model)?;
            let spec = match (g.target.docs, g.target.bytes) {
                (Some(n), _) => GenerationSpec::docs(n, g.seed),
                (None, Some(n)) => GenerationSpec::bytes(n, g.seed),
                (None, None) => unreachable!("clap requires one target"),
            };
            spec.check()?;
            let mut out = create(&g.out)?;
            let opts = OutputOptions { unlabeled: g.unlabeled, threads: g.threads as usize };
            let summary = generate_corpus(&model, &spec, opts, &mut out)?;
            finish(&g.out, out)?;
            eprintln!("{} documents, {} bytes", summary.docs_written, summary.bytes_written);
            Ok(true)
        }
        Command::AnalyzeTrace(a) => {
            let input = open(&a.input)?;
            check_output(&a.out)?;
            let trace = QueryTrace::read(input)?;
            let model = analyze_trace(&trace, a.section_ms, a.min_freq)?;
            let mut out = create(&a.out)?;
            model.save(&mut out)?;
            finish(&a.out, out)?;
            eprintln!("{} requests, {} sections", trace.len(), model.section_rates().len());
            Ok(true)
        }
        Command::GenTrace(g) => {
            let model = load_trace_model(&g.model)?;
            let mut spec = match (g.target.queries, g.target.duration_ms) {
                (Some(n), _) => TraceGenSpec::queries(n, g.seed),
                (None, Some(ms)) => TraceGenSpec::duration(ms, g.seed),
                (None, None) => unreachable!("clap requires one target"),
            };
            spec.rate_scale = g.rate_scale;
            if g.uniform_arrivals {
                spec.arrivals = Arrivals::Uniform;
            }
            let generator = TraceGenerator::new(&model, &spec)?;
            let mut out = create(&g.out)?;
            let mut n = 0u64;
            for entry in generator {
                write_entry(&mut out, &entry).map_err(|e| io_failure(&g.out, e))?;
                n += 1;
            }
            finish(&g.out, out)?;
            eprintln!("{n} requests");
            Ok(true)
        }
        Command::ValidateCorpus(v) => {
            let th = CorpusThresholds {
                class_alpha: check_threshold("class-alpha", v.class_alpha)?,
                word_kl: check_threshold("word-kl", v.word_kl)?,
                length_ks: check_threshold("length-ks", v.length_ks)?,
            };
            let model = load_corpus_model(&v.model)?;
            let data = open(&v.data)?;
            if let Some(path) = &v.report {
                check_output(path)?;
            }
            let r = validate_corpus(&model, DocumentReader::new(data), &th)?;
            report(&r, v.report.as_deref())
        }
        Command::ValidateTrace(v) => {
            let th = TraceThresholds {
                zipf_tolerance: check_threshold("zipf-tolerance", v.zipf_tolerance)?,
                reuse_ks: check_threshold("reuse-ks", v.reuse_ks)?,
                rate_relative: check_threshold("rate-tolerance", v.rate_tolerance)?,
                rate_scale: v.rate_scale,
                duration_ms: v.duration_ms,
                min_freq: v.min_freq,
            };
            let model = load_trace_model(&v.model)?;
            let data = open(&v.data)?;
            if let Some(path) = &v.report {
                check_output(path)?;
            }
            let trace = QueryTrace::read(data)?;
            let r = validate_trace(&model, &trace, &th)?;
            report(&r, v.report.as_deref())
        }
        Command::Bench(Bench::Run { input, opts }) => {
            let (workloads, cfg) = bench_config(&opts)?;
            open(&input)?;
            let mut results = Vec::new();
            for w in workloads {
                results.push(run_workload(w, &input, &cfg)?);
            }
            print!("{}", results_table(&results));
            log_results(&opts, &results)?;
            Ok(true)
        }
        Command::Bench(Bench::Compare { a, b, reps, min_secs, opts }) => {
            let (workloads, mut cfg) = bench_config(&opts)?;
            cfg.min_repetition_secs = check_threshold("min-secs", min_secs)?;
            open(&a)?;
            open(&b)?;
            let rows = bench_compare(&workloads, &a, &b, reps, &cfg)?;
            print!("{}", compare_table(&rows));
            let runs: Vec<WorkloadResult> = rows.iter().flat_map(|r| r.runs_a.iter().chain(&r.runs_b)).cloned().collect();
            log_results(&opts, &runs)?;
            Ok(true)
        }
        Command::Bench(Bench::Sweep { model, volumes, work_dir, csv_dir, threads, opts }) => {
            let (workloads, cfg) = bench_config(&opts)?;
            let model = load_corpus_model(&model)?;
            require_dir(&work_dir)?;
            if let Some(dir) = &csv_dir {
                require_dir(dir)?;
            }
            let plan = SweepPlan { volumes: &volumes, work_dir: &work_dir, master_seed: opts.seed, threads: threads as usize };
            let rows = bench_sweep(&workloads, &model, &plan, &cfg, |row| {
                eprintln!("{}\t{}", row.volume, row.result.tsv_row());
            })?;
            print!("{}", sweep_table(&rows));
            if let Some(dir) = &csv_dir {
                for path in write_sweep_csvs(&rows, dir).map_err(|e| io_failure(dir, e))? {
                    eprintln!("wrote {}", path.display());
                }
            }
            let results: Vec<WorkloadResult> = rows.into_iter().map(|r| r.result).collect();
            log_results(&opts, &results)?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_FAIL),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_IO)
        }
    }
}
