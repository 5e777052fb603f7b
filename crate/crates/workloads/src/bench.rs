use std::fs::{File, OpenOptions};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use seedgen_core::corpus::{generate_corpus, CorpusModel, GenerationSpec, OutputOptions};

use crate::classify::{run_naive_bayes, run_svm, SvmParams};
use crate::error::{Error, Result};
use crate::grep::run_grep;
use crate::rate::{Workload, WorkloadResult, TSV_HEADER};
use crate::sort::{run_sort, SortOptions, TMPDIR_ENV};
use crate::wordcount::{run_wordcount, DEFAULT_TOP_K};

pub const DEFAULT_GREP_PATTERN: &str = "the";
pub const MIN_REPETITIONS: usize = 3;
/// Largest relative size difference accepted by [`bench_compare`].
pub const SIZE_TOLERANCE: f64 = 0.01;

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub sort: SortOptions,
    pub grep_pattern: String,
    pub top_k: usize,
    pub svm: SvmParams,
    /// Directory for sort output; `SEEDGEN_TMPDIR` or the system temp
    /// directory when unset.
    pub scratch_dir: Option<PathBuf>,
    /// Minimum duration of one timed repetition in [`bench_compare`],
    /// counting the passes on both datasets. Zero means a single pass on
    /// each.
    pub min_repetition_secs: f64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            sort: SortOptions::default(),
            grep_pattern: DEFAULT_GREP_PATTERN.into(),
            top_k: DEFAULT_TOP_K,
            svm: SvmParams::default(),
            scratch_dir: None,
            min_repetition_secs: 0.0,
        }
    }
}

impl BenchConfig {
    fn scratch_parent(&self) -> PathBuf {
        self.scratch_dir
            .clone()
            .or_else(|| std::env::var_os(TMPDIR_ENV).map(PathBuf::from))
            .unwrap_or_else(std::env::temp_dir)
    }
}

/// Runs one workload on `input`. Sort output goes to a temporary file that
/// is removed afterwards.
pub fn run_workload(workload: Workload, input: &Path, cfg: &BenchConfig) -> Result<WorkloadResult> {
    match workload {
        Workload::Sort => {
            let out = tempfile::Builder::new().prefix("seedgen-sorted-").tempfile_in(cfg.scratch_parent())?;
            run_sort(input, out.path(), &cfg.sort)
        }
        Workload::Grep => run_grep(input, &cfg.grep_pattern),
        Workload::WordCount => run_wordcount(input, cfg.top_k),
        Workload::NaiveBayes => run_naive_bayes(input),
        Workload::Svm => run_svm(input, &cfg.svm),
    }
}

fn median_pass(mut passes: Vec<WorkloadResult>) -> WorkloadResult {
    passes.sort_by(|x, y| x.wall_time_secs.total_cmp(&y.wall_time_secs));
    let mid = passes.len() / 2;
    if passes.len() % 2 == 1 {
        return passes.swap_remove(mid);
    }
    let secs = (passes[mid - 1].wall_time_secs + passes[mid].wall_time_secs) / 2.0;
    let r = passes.swap_remove(mid);
    WorkloadResult::new(r.workload, r.input_bytes, secs, r.summary)
}

/// One timed repetition on both datasets: passes alternate A, B, A, B, ...
/// until `cfg.min_repetition_secs` have passed (at least one pair), and
/// each dataset reports its median pass. Alternating at pass granularity
/// exposes both datasets to the same drift in machine speed.
pub fn paired_repetition(
    workload: Workload,
    a: &Path,
    b: &Path,
    cfg: &BenchConfig,
) -> Result<(WorkloadResult, WorkloadResult)> {
    let (mut passes_a, mut passes_b) = (Vec::new(), Vec::new());
    let mut total = 0.0;
    loop {
        let ra = run_workload(workload, a, cfg)?;
        let rb = run_workload(workload, b, cfg)?;
        total += ra.wall_time_secs + rb.wall_time_secs;
        passes_a.push(ra);
        passes_b.push(rb);
        if total >= cfg.min_repetition_secs {
            return Ok((median_pass(passes_a), median_pass(passes_b)));
        }
    }
}

#[derive(Debug, Clone)]
pub struct CompareRow {
    pub workload: Workload,
    pub mean_rate_a: f64,
    pub mean_rate_b: f64,
    /// `|rate_a - rate_b| / rate_a`.
    pub deviation: f64,
    pub runs_a: Vec<WorkloadResult>,
    pub runs_b: Vec<WorkloadResult>,
}

fn file_size(path: &Path) -> Result<u64> {
    Ok(std::fs::metadata(path)?.len())
}

fn mean_rate(runs: &[WorkloadResult]) -> f64 {
    runs.iter().map(|r| r.rate).sum::<f64>() / runs.len() as f64
}

/// Measures each workload on two datasets of (nearly) equal size and reports
/// the relative deviation of their mean data-processing rates.
///
/// Each workload first runs once on each dataset untimed, so both start
/// from a warm page cache; each timed repetition is a [`paired_repetition`].
pub fn bench_compare(
    workloads: &[Workload],
    a: &Path,
    b: &Path,
    repetitions: usize,
    cfg: &BenchConfig,
) -> Result<Vec<CompareRow>> {
    if repetitions < MIN_REPETITIONS {
        return Err(Error::InvalidArgument(format!("at least {MIN_REPETITIONS} repetitions are required")));
    }
    let (size_a, size_b) = (file_size(a)?, file_size(b)?);
    if size_a == 0 || (size_a.abs_diff(size_b) as f64) > SIZE_TOLERANCE * size_a as f64 {
        return Err(Error::SizeMismatch { a: size_a, b: size_b });
    }
    let mut rows = Vec::with_capacity(workloads.len());
    for &w in workloads {
        run_workload(w, a, cfg)?;
        run_workload(w, b, cfg)?;
        let mut runs_a = Vec::with_capacity(repetitions);
        let mut runs_b = Vec::with_capacity(repetitions);
        for _ in 0..repetitions {
            let (ra, rb) = paired_repetition(w, a, b, cfg)?;
            runs_a.push(ra);
            runs_b.push(rb);
        }
        let (mean_rate_a, mean_rate_b) = (mean_rate(&runs_a), mean_rate(&runs_b));
        rows.push(CompareRow {
            workload: w,
            mean_rate_a,
            mean_rate_b,
            deviation: (mean_rate_a - mean_rate_b).abs() / mean_rate_a,
            runs_a,
            runs_b,
        });
    }
    Ok(rows)
}

pub fn compare_table(rows: &[CompareRow]) -> String {
    let mut out = String::from("workload\trate_a_MB/s\trate_b_MB/s\tdeviation\n");
    for r in rows {
        out.push_str(&format!("{}\t{:.3}\t{:.3}\t{:.4}\n", r.workload, r.mean_rate_a, r.mean_rate_b, r.deviation));
    }
    out
}

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub volume: u64,
    pub result: WorkloadResult,
}

/// Volumes and generation settings of a [`bench_sweep`].
#[derive(Debug, Clone, Copy)]
pub struct SweepPlan<'a> {
    /// Corpus sizes in bytes, strictly ascending.
    pub volumes: &'a [u64],
    /// Where each generated corpus is written; it is deleted after use.
    pub work_dir: &'a Path,
    pub master_seed: u64,
    /// Generation threads; they do not change the generated bytes.
    pub threads: usize,
}

/// For each volume (ascending), generates a labeled corpus of that many
/// bytes from `model` into the work directory, runs every workload once on
/// it, and deletes it. Generation is not timed. `progress` sees each row as
/// it is measured.
pub fn bench_sweep(
    workloads: &[Workload],
    model: &CorpusModel,
    plan: &SweepPlan<'_>,
    cfg: &BenchConfig,
    mut progress: impl FnMut(&SweepRow),
) -> Result<Vec<SweepRow>> {
    let SweepPlan { volumes, work_dir, master_seed, threads } = *plan;
    if volumes.is_empty() || volumes.contains(&0) || volumes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("volumes must be positive and strictly ascending".into()));
    }
    let mut rows = Vec::new();
    for &volume in volumes {
        let path = work_dir.join(format!("sweep-{volume}.txt"));
        {
            let mut out = BufWriter::with_capacity(1 << 20, File::create(&path)?);
            let opts = OutputOptions { unlabeled: false, threads };
            generate_corpus(model, &GenerationSpec::bytes(volume, master_seed), opts, &mut out)?;
            out.flush()?;
        }
        let measured: Result<()> = workloads.iter().try_for_each(|&w| {
            let row = SweepRow { volume, result: run_workload(w, &path, cfg)? };
            progress(&row);
            rows.push(row);
            Ok(())
        });
        std::fs::remove_file(&path)?;
        measured?;
    }
    Ok(rows)
}

pub fn sweep_table(rows: &[SweepRow]) -> String {
    let mut out = format!("volume\t{TSV_HEADER}\n");
    for r in rows {
        out.push_str(&format!("{}\t{}\n", r.volume, r.result.tsv_row()));
    }
    out
}

/// Writes `sweep_<workload>.csv` (input bytes, MB/s) per workload into
/// `dir` and returns the paths.
pub fn write_sweep_csvs(rows: &[SweepRow], dir: &Path) -> io::Result<Vec<PathBuf>> {
    let mut paths = Vec::new();
    for w in Workload::ALL {
        let mine: Vec<&SweepRow> = rows.iter().filter(|r| r.result.workload == w).collect();
        if mine.is_empty() {
            continue;
        }
        let path = dir.join(format!("sweep_{w}.csv"));
        let mut out = BufWriter::new(File::create(&path)?);
        writeln!(out, "input_bytes,rate_mb_s")?;
        for r in mine {
            writeln!(out, "{},{:.6}", r.result.input_bytes, r.result.rate)?;
        }
        out.flush()?;
        paths.push(path);
    }
    Ok(paths)
}

pub fn results_table(results: &[WorkloadResult]) -> String {
    let mut out = format!("{TSV_HEADER}\n");
    for r in results {
        out.push_str(&r.tsv_row());
        out.push('\n');
    }
    out
}

/// Appends result rows to a log file, writing the header when the file is
/// new or empty.
pub fn append_results_log(path: &Path, results: &[WorkloadResult]) -> io::Result<()> {
    let mut file = OpenOptions::new().create(true).append(true).open(path)?;
    let mut out = String::new();
    if file.metadata()?.len() == 0 {
        out.push_str(TSV_HEADER);
        out.push('\n');
    }
    for r in results {
        out.push_str(&r.tsv_row());
        out.push('\n');
    }
    file.write_all(out.as_bytes())
}
