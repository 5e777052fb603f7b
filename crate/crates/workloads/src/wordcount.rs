use std::collections::HashMap;
use std::fs::File;
use std::path::Path;
use std::time::Instant;

use crate::error::Result;
use crate::lines::for_each_block;
use crate::rate::{Summary, Workload, WorkloadResult};

pub const DEFAULT_TOP_K: usize = 20;

/// Exact counts of ASCII-whitespace-separated tokens.
#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct WordCounts {
    pub counts: HashMap<Box<[u8]>, u64>,
    pub total: u64,
}

impl WordCounts {
    pub fn add(&mut self, data: &[u8]) {
        for token in data.split(u8::is_ascii_whitespace).filter(|t| !t.is_empty()) {
            self.total += 1;
            match self.counts.get_mut(token) {
                Some(n) => *n += 1,
                None => {
                    self.counts.insert(token.into(), 1);
                }
            }
        }
    }

    /// The `k` most frequent tokens, by descending count then ascending
    /// bytes.
    pub fn top(&self, k: usize) -> Vec<(String, u64)> {
        let mut all: Vec<(&[u8], u64)> = self.counts.iter().map(|(w, &n)| (&**w, n)).collect();
        let k = k.min(all.len());
        let order = |a: &(&[u8], u64), b: &(&[u8], u64)| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0));
        if k < all.len() && k > 0 {
            all.select_nth_unstable_by(k - 1, order);
        }
        all.truncate(k);
        all.sort_unstable_by(order);
        all.into_iter().map(|(w, n)| (String::from_utf8_lossy(w).into_owned(), n)).collect()
    }
}

pub fn run_wordcount(input: &Path, top_k: usize) -> Result<WorkloadResult> {
    let start = Instant::now();
    let mut counts = WordCounts::default();
    let bytes = for_each_block(File::open(input)?, |block| counts.add(block))?;
    let top = counts.top(top_k);
    let elapsed = start.elapsed().as_secs_f64();
    let summary = Summary::TopWords { total: counts.total, distinct: counts.counts.len() as u64, top };
    Ok(WorkloadResult::new(Workload::WordCount, bytes, elapsed, summary))
}
