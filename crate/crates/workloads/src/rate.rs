use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

pub const MIB: f64 = (1u64 << 20) as f64;

/// Input megabytes (2^20 bytes) processed per second of wall time.
pub fn data_processing_rate(input_bytes: u64, wall_time_secs: f64) -> Result<f64> {
    if input_bytes == 0 {
        return Err(Error::InvalidArgument("input size must be positive".into()));
    }
    if !(wall_time_secs > 0.0 && wall_time_secs.is_finite()) {
        return Err(Error::InvalidArgument(format!("wall time must be positive, got {wall_time_secs}")));
    }
    Ok(input_bytes as f64 / MIB / wall_time_secs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Workload {
    Sort,
    Grep,
    WordCount,
    NaiveBayes,
    Svm,
}

impl Workload {
    pub const ALL: [Workload; 5] =
        [Workload::Sort, Workload::Grep, Workload::WordCount, Workload::NaiveBayes, Workload::Svm];

    pub fn name(self) -> &'static str {
        match self {
            Workload::Sort => "sort",
            Workload::Grep => "grep",
            Workload::WordCount => "wordcount",
            Workload::NaiveBayes => "naive_bayes",
            Workload::Svm => "svm",
        }
    }

    /// Classification workloads need labeled input.
    pub fn needs_labels(self) -> bool {
        matches!(self, Workload::NaiveBayes | Workload::Svm)
    }
}

impl fmt::Display for Workload {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Workload {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Workload::ALL
            .into_iter()
            .find(|w| w.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown workload {s:?}")))
    }
}

/// Workload-specific output.
#[derive(Debug, Clone, PartialEq)]
pub enum Summary {
    Sorted { lines: u64, checksum: u64 },
    Matches(u64),
    TopWords { total: u64, distinct: u64, top: Vec<(String, u64)> },
    Accuracy { correct: u64, tested: u64 },
}

impl Summary {
    pub fn accuracy(&self) -> Option<f64> {
        match *self {
            Summary::Accuracy { correct, tested } if tested > 0 => Some(correct as f64 / tested as f64),
            _ => None,
        }
    }
}

impl fmt::Display for Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Summary::Sorted { lines, checksum } => write!(f, "lines={lines} xxh3={checksum:016x}"),
            Summary::Matches(n) => write!(f, "matches={n}"),
            Summary::TopWords { total, distinct, top } => {
                write!(f, "tokens={total} distinct={distinct} top=")?;
                for (i, (w, n)) in top.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{w}:{n}")?;
                }
                Ok(())
            }
            Summary::Accuracy { correct, tested } => {
                let acc = if *tested > 0 { *correct as f64 / *tested as f64 } else { 0.0 };
                write!(f, "accuracy={acc:.4} ({correct}/{tested})")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorkloadResult {
    pub workload: Workload,
    pub input_bytes: u64,
    pub wall_time_secs: f64,
    /// MB/s with MB = 2^20 bytes.
    pub rate: f64,
    pub summary: Summary,
}

impl WorkloadResult {
    /// Wall times below a nanosecond (timer resolution on tiny inputs) are
    /// clamped so the rate stays finite. Empty inputs have rate 0.
    pub fn new(workload: Workload, input_bytes: u64, wall_time_secs: f64, summary: Summary) -> Self {
        let wall_time_secs = wall_time_secs.max(1e-9);
        let rate = input_bytes as f64 / MIB / wall_time_secs;
        WorkloadResult { workload, input_bytes, wall_time_secs, rate, summary }
    }

    /// One row of the results table: workload, bytes, seconds, MB/s, summary.
    pub fn tsv_row(&self) -> String {
        format!(
            "{}\t{}\t{:.6}\t{:.3}\t{}",
            self.workload, self.input_bytes, self.wall_time_secs, self.rate, self.summary
        )
    }
}

pub const TSV_HEADER: &str = "workload\tbytes\tseconds\tMB/s\tsummary";

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rate_examples() {
        assert_eq!(data_processing_rate(1000 << 20, 10.0).unwrap(), 100.0);
        assert_eq!(data_processing_rate(1 << 20, 1.0).unwrap(), 1.0);
        let sort_100g = data_processing_rate(100 << 30, 2487.0).unwrap();
        assert!((sort_100g - 41.17).abs() < 0.005, "{sort_100g}");
    }

    #[test]
    fn rate_rejects_nonpositive() {
        assert!(data_processing_rate(0, 1.0).is_err());
        assert!(data_processing_rate(1, 0.0).is_err());
        assert!(data_processing_rate(1, -2.0).is_err());
        assert!(data_processing_rate(1, f64::NAN).is_err());
    }

    #[test]
    fn result_rate_matches_formula() {
        let r = WorkloadResult::new(Workload::Grep, 3 << 20, 1.5, Summary::Matches(4));
        assert_eq!(r.rate, (3 << 20) as f64 / MIB / 1.5);
        assert!(r.tsv_row().starts_with("grep\t3145728\t1.500000\t2.000\tmatches=4"));
    }

    #[test]
    fn workload_names_roundtrip() {
        for w in Workload::ALL {
            assert_eq!(w.name().parse::<Workload>().unwrap(), w);
        }
        assert!("hadoop".parse::<Workload>().is_err());
    }
}
