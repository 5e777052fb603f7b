use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use tempfile::TempDir;
use xxhash_rust::xxh3::Xxh3;

use crate::error::{Error, Result};
use crate::rate::{Summary, Workload, WorkloadResult};

pub const DEFAULT_MEMORY_BUDGET: usize = 256 << 20;
/// Environment variable naming the directory for spill files.
pub const TMPDIR_ENV: &str = "SEEDGEN_TMPDIR";

const MERGE_FAN_IN: usize = 64;
const INDEX_ENTRY_BYTES: usize = std::mem::size_of::<(usize, usize)>();

#[derive(Debug, Clone)]
pub struct SortOptions {
    /// Bytes of line data plus index held in memory before a run spills.
    pub memory_budget: usize,
    /// Parent directory for spill files; `SEEDGEN_TMPDIR` or the system
    /// temp directory when unset.
    pub spill_dir: Option<PathBuf>,
}

impl SortOptions {
    pub fn with_budget(memory_budget: usize) -> Self {
        SortOptions { memory_budget, spill_dir: None }
    }

    fn spill_parent(&self) -> PathBuf {
        self.spill_dir
            .clone()
            .or_else(|| std::env::var_os(TMPDIR_ENV).map(PathBuf::from))
            .unwrap_or_else(std::env::temp_dir)
    }
}

impl Default for SortOptions {
    fn default() -> Self {
        SortOptions::with_budget(DEFAULT_MEMORY_BUDGET)
    }
}

/// Output sink that hashes and counts what it writes.
struct HashingWriter<W> {
    inner: W,
    hasher: Xxh3,
    lines: u64,
}

impl<W: Write> HashingWriter<W> {
    fn line(&mut self, line: &[u8]) -> io::Result<()> {
        self.hasher.update(line);
        self.hasher.update(b"\n");
        self.lines += 1;
        self.inner.write_all(line)?;
        self.inner.write_all(b"\n")
    }
}

/// Lines of the current run, stored back to back in one arena.
#[derive(Default)]
struct Run {
    arena: Vec<u8>,
    index: Vec<(usize, usize)>,
}

impl Run {
    fn footprint(&self) -> usize {
        self.arena.len() + self.index.len() * INDEX_ENTRY_BYTES
    }

    fn sort(&mut self) {
        let arena = &self.arena;
        self.index.sort_unstable_by(|a, b| arena[a.0..a.0 + a.1].cmp(&arena[b.0..b.0 + b.1]));
    }

    fn lines(&self) -> impl Iterator<Item = &[u8]> {
        self.index.iter().map(|&(s, l)| &self.arena[s..s + l])
    }

    fn clear(&mut self) {
        self.arena.clear();
        self.index.clear();
    }
}

struct Spill {
    dir: TempDir,
    runs: Vec<PathBuf>,
    next_id: usize,
}

impl Spill {
    fn new(parent: &Path) -> Result<Self> {
        let dir = tempfile::Builder::new()
            .prefix("seedgen-sort-")
            .tempdir_in(parent)
            .map_err(|source| Error::Spill { dir: parent.to_owned(), source })?;
        Ok(Spill { dir, runs: Vec::new(), next_id: 0 })
    }

    fn err(&self, source: io::Error) -> Error {
        Error::Spill { dir: self.dir.path().to_owned(), source }
    }

    fn create(&mut self) -> Result<(PathBuf, BufWriter<File>)> {
        let path = self.dir.path().join(format!("run-{:06}", self.next_id));
        self.next_id += 1;
        let file = File::create(&path).map_err(|e| self.err(e))?;
        Ok((path, BufWriter::with_capacity(1 << 20, file)))
    }

    fn write_run(&mut self, run: &Run) -> Result<()> {
        let (path, mut out) = self.create()?;
        let res: io::Result<()> = (|| {
            for line in run.lines() {
                out.write_all(line)?;
                out.write_all(b"\n")?;
            }
            out.flush()
        })();
        res.map_err(|e| self.err(e))?;
        self.runs.push(path);
        Ok(())
    }

    /// Merges groups of runs until at most `MERGE_FAN_IN` remain.
    fn reduce(&mut self, buffer: usize) -> Result<()> {
        while self.runs.len() > MERGE_FAN_IN {
            let pending = std::mem::take(&mut self.runs);
            for group in pending.chunks(MERGE_FAN_IN) {
                let (path, mut out) = self.create()?;
                merge(group, buffer, |line| {
                    out.write_all(line)?;
                    out.write_all(b"\n")
                })
                .map_err(|e| self.err(e))?;
                out.flush().map_err(|e| self.err(e))?;
                for p in group {
                    std::fs::remove_file(p).map_err(|e| self.err(e))?;
                }
                self.runs.push(path);
            }
        }
        Ok(())
    }
}

/// K-way merge of sorted, LF-terminated run files.
fn merge<F: FnMut(&[u8]) -> io::Result<()>>(runs: &[PathBuf], buffer: usize, mut emit: F) -> io::Result<()> {
    let mut readers = Vec::with_capacity(runs.len());
    let mut heap = BinaryHeap::with_capacity(runs.len());
    for (i, path) in runs.iter().enumerate() {
        let mut reader = BufReader::with_capacity(buffer, File::open(path)?);
        let mut line = Vec::new();
        if read_line(&mut reader, &mut line)? {
            heap.push(Reverse((line, i)));
        }
        readers.push(reader);
    }
    while let Some(Reverse((mut line, i))) = heap.pop() {
        emit(&line)?;
        if read_line(&mut readers[i], &mut line)? {
            heap.push(Reverse((line, i)));
        }
    }
    Ok(())
}

/// Reads one line without its `\n` into `line`; false at end of input.
fn read_line<R: BufRead>(reader: &mut R, line: &mut Vec<u8>) -> io::Result<bool> {
    line.clear();
    if reader.read_until(b'\n', line)? == 0 {
        return Ok(false);
    }
    if line.last() == Some(&b'\n') {
        line.pop();
    }
    Ok(true)
}

/// Sorts the lines of `input` in lexicographic byte order into `output`.
/// Inputs larger than the memory budget are sorted externally: sorted runs
/// spill to a temporary directory and are merged. Every output line ends
/// with `\n`, including one that lacked it in the input.
pub fn run_sort(input: &Path, output: &Path, opts: &SortOptions) -> Result<WorkloadResult> {
    if opts.memory_budget == 0 {
        return Err(Error::InvalidArgument("sort memory budget must be positive".into()));
    }
    let start = Instant::now();
    let mut reader = BufReader::with_capacity(1 << 20, File::open(input)?);
    let mut input_bytes = 0u64;
    let mut run = Run::default();
    let mut spill: Option<Spill> = None;
    loop {
        let begin = run.arena.len();
        let n = reader.read_until(b'\n', &mut run.arena)?;
        if n == 0 {
            break;
        }
        input_bytes += n as u64;
        let end = if run.arena.last() == Some(&b'\n') { run.arena.len() - 1 } else { run.arena.len() };
        run.arena.truncate(end);
        run.index.push((begin, end - begin));
        if run.footprint() >= opts.memory_budget {
            run.sort();
            if spill.is_none() {
                spill = Some(Spill::new(&opts.spill_parent())?);
            }
            spill.as_mut().expect("just created").write_run(&run)?;
            run.clear();
        }
    }

    let mut out = HashingWriter {
        inner: BufWriter::with_capacity(1 << 20, File::create(output)?),
        hasher: Xxh3::new(),
        lines: 0,
    };
    run.sort();
    match spill.as_mut() {
        None => {
            for line in run.lines() {
                out.line(line)?;
            }
        }
        Some(spill) => {
            if !run.index.is_empty() {
                spill.write_run(&run)?;
            }
            drop(std::mem::take(&mut run));
            let buffer = (opts.memory_budget / (MERGE_FAN_IN + 1)).clamp(64 << 10, 8 << 20);
            spill.reduce(buffer)?;
            merge(&spill.runs, buffer, |line| out.line(line))?;
        }
    }
    out.inner.flush()?;
    let elapsed = start.elapsed().as_secs_f64();
    let summary = Summary::Sorted { lines: out.lines, checksum: out.hasher.digest() };
    Ok(WorkloadResult::new(Workload::Sort, input_bytes, elapsed, summary))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sort_bytes(data: &[u8], budget: usize) -> (Vec<u8>, WorkloadResult) {
        let dir = tempfile::tempdir().unwrap();
        let input = dir.path().join("in");
        let output = dir.path().join("out");
        std::fs::write(&input, data).unwrap();
        let opts = SortOptions { memory_budget: budget, spill_dir: Some(dir.path().to_owned()) };
        let res = run_sort(&input, &output, &opts).unwrap();
        (std::fs::read(&output).unwrap(), res)
    }

    fn oracle(data: &[u8]) -> Vec<u8> {
        let mut lines: Vec<&[u8]> = data.split(|&b| b == b'\n').collect();
        if data.ends_with(b"\n") || data.is_empty() {
            lines.pop();
        }
        lines.sort();
        lines.iter().flat_map(|l| l.iter().copied().chain(*b"\n")).collect()
    }

    #[test]
    fn examples() {
        assert_eq!(sort_bytes(b"b\na\nc\n", 1 << 20).0, b"a\nb\nc\n");
        assert_eq!(sort_bytes(b"a\nb\nc\n", 1 << 20).0, b"a\nb\nc\n");
        assert_eq!(sort_bytes(b"b\na", 1 << 20).0, b"a\nb\n");
        let (out, res) = sort_bytes(b"", 1 << 20);
        assert!(out.is_empty());
        assert_eq!(res.summary, Summary::Sorted { lines: 0, checksum: Xxh3::new().digest() });
    }

    #[test]
    fn external_path_with_multi_pass_merge() {
        // A 40-byte budget spills every couple of lines, giving more runs
        // than the merge fan-in.
        let data: Vec<u8> = (0..400u32).map(|i| format!("{:05}\n", (i * 7919) % 1000)).collect::<String>().into();
        let (out, res) = sort_bytes(&data, 40);
        assert_eq!(out, oracle(&data));
        assert_eq!(res.input_bytes, data.len() as u64);
        match res.summary {
            Summary::Sorted { lines, checksum } => {
                assert_eq!(lines, 400);
                assert_eq!(checksum, xxhash_rust::xxh3::xxh3_64(&out));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn spill_dir_is_removed() {
        let dir = tempfile::tempdir().unwrap();
        let input = dir.path().join("in");
        std::fs::write(&input, b"c\nb\na\n").unwrap();
        let spill = dir.path().join("spill");
        std::fs::create_dir(&spill).unwrap();
        let opts = SortOptions { memory_budget: 1, spill_dir: Some(spill.clone()) };
        run_sort(&input, &dir.path().join("out"), &opts).unwrap();
        assert_eq!(std::fs::read_dir(&spill).unwrap().count(), 0);
    }

    #[test]
    fn missing_spill_dir_is_a_spill_error() {
        let dir = tempfile::tempdir().unwrap();
        let input = dir.path().join("in");
        std::fs::write(&input, b"c\nb\na\n").unwrap();
        let opts = SortOptions { memory_budget: 1, spill_dir: Some(dir.path().join("absent")) };
        assert!(matches!(run_sort(&input, &dir.path().join("out"), &opts), Err(Error::Spill { .. })));
    }

    proptest! {
        #[test]
        fn matches_in_memory_oracle(lines in proptest::collection::vec("[a-c]{0,4}", 0..60), budget in 1usize..200) {
            let data = lines.join("\n");
            let (out, _) = sort_bytes(data.as_bytes(), budget);
            prop_assert_eq!(out, oracle(data.as_bytes()));
        }
    }
}
