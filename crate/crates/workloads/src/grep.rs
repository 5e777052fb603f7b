use std::fs::File;
use std::path::Path;
use std::time::Instant;

use memchr::memchr;
use memchr::memmem::Finder;

use crate::error::{Error, Result};
use crate::lines::for_each_block;
use crate::rate::{Summary, Workload, WorkloadResult};

/// Counts lines of `data` (split on `\n`) containing `pattern`.
pub fn count_matching_lines(data: &[u8], finder: &Finder<'_>) -> u64 {
    let mut count = 0;
    let mut pos = 0;
    while let Some(i) = finder.find(&data[pos..]) {
        count += 1;
        let hit = pos + i;
        match memchr(b'\n', &data[hit..]) {
            Some(nl) => pos = hit + nl + 1,
            None => break,
        }
        if pos >= data.len() {
            break;
        }
    }
    count
}

fn finder(pattern: &str) -> Result<Finder<'_>> {
    if pattern.is_empty() {
        return Err(Error::InvalidArgument("grep pattern must not be empty".into()));
    }
    if pattern.contains('\n') {
        return Err(Error::InvalidArgument("grep pattern must not contain a newline".into()));
    }
    Ok(Finder::new(pattern.as_bytes()))
}

/// Counts lines containing `pattern` as a fixed substring.
pub fn run_grep(input: &Path, pattern: &str) -> Result<WorkloadResult> {
    let finder = finder(pattern)?;
    let start = Instant::now();
    let mut matches = 0;
    let bytes = for_each_block(File::open(input)?, |block| matches += count_matching_lines(block, &finder))?;
    let elapsed = start.elapsed().as_secs_f64();
    Ok(WorkloadResult::new(Workload::Grep, bytes, elapsed, Summary::Matches(matches)))
}
