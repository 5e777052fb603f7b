//! Text classification workloads over `label<TAB>tokens` files.
//!
//! Both classifiers use the same deterministic split: record `i`
//! (zero-based) is a test document when `i % 5 == 4`, a training document
//! otherwise.

mod naive_bayes;
mod svm;

use std::fs::File;
use std::path::Path;

use memchr::memchr;

pub use naive_bayes::{run_naive_bayes, NaiveBayes, NaiveBayesTrainer};
pub use svm::{run_svm, Svm, SvmParams};

use crate::error::{Error, Result};
use crate::lines::for_each_block;

pub const TEST_FOLD: usize = 5;

pub fn is_test_record(index: usize) -> bool {
    index % TEST_FOLD == TEST_FOLD - 1
}

pub(crate) fn tokens(body: &[u8]) -> impl Iterator<Item = &[u8]> {
    body.split(u8::is_ascii_whitespace).filter(|t| !t.is_empty())
}

fn malformed(index: usize, reason: &str) -> Error {
    seedgen_core::Error::MalformedDocument { index, reason: reason.into() }.into()
}

/// Streams `(record index, label, body)` for each line of a labeled file
/// and returns the bytes read.
pub(crate) fn for_each_record<F>(path: &Path, mut f: F) -> Result<u64>
where
    F: FnMut(usize, &[u8], &[u8]) -> Result<()>,
{
    let mut index = 0usize;
    let mut failure = None;
    let bytes = for_each_block(File::open(path)?, |block| {
        if failure.is_some() {
            return;
        }
        let block = block.strip_suffix(b"\n").unwrap_or(block);
        for line in block.split(|&b| b == b'\n') {
            let line = line.strip_suffix(b"\r").unwrap_or(line);
            let res = match memchr(b'\t', line) {
                None => Err(malformed(index, "missing tab separator")),
                Some(0) => Err(malformed(index, "empty label")),
                Some(tab) => f(index, &line[..tab], &line[tab + 1..]),
            };
            if let Err(e) = res {
                failure = Some(e);
                return;
            }
            index += 1;
        }
    })?;
    match failure {
        Some(e) => Err(e),
        None => Ok(bytes),
    }
}

pub(crate) fn label_string(label: &[u8]) -> String {
    String::from_utf8_lossy(label).into_owned()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_every_fifth_record() {
        let test: Vec<usize> = (0..12).filter(|&i| is_test_record(i)).collect();
        assert_eq!(test, [4, 9]);
    }

    #[test]
    fn records_and_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.tsv");
        std::fs::write(&path, b"A\tx y\r\nB\tz").unwrap();
        let mut seen = Vec::new();
        let n = for_each_record(&path, |i, l, b| {
            seen.push((i, l.to_vec(), tokens(b).count()));
            Ok(())
        })
        .unwrap();
        assert_eq!(n, 10);
        assert_eq!(seen, [(0, b"A".to_vec(), 2), (1, b"B".to_vec(), 1)]);

        std::fs::write(&path, b"A\tx\nno tab here\n").unwrap();
        let err = for_each_record(&path, |_, _, _| Ok(())).unwrap_err();
        assert!(matches!(err, Error::Core(seedgen_core::Error::MalformedDocument { index: 1, .. })), "{err}");
    }
}
