//! Query traces: `timestamp_ms<TAB>term term ...` records, their semantic,
//! locality and timing models, and a generator that replays those models.

mod gen;
mod model;
pub mod reference;
mod reuse;
mod zipf;

use std::io::{self, BufRead, Write};

pub use gen::{
    generate_timestamps, generate_trace, Arrivals, LruStack, QuerySampler, Step, Timestamps, TraceGenSpec,
    TraceGenerator, TraceTarget,
};
pub use model::{analyze_trace, TraceModel, DEFAULT_MIN_FREQ};
pub use reuse::{compute_reuse_distances, ReuseDistance, ReuseHistogram};
pub use zipf::{fit_zipf, ZipfFit};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceEntry {
    pub timestamp_ms: u64,
    pub terms: Vec<String>,
}

impl TraceEntry {
    pub fn new<I, S>(timestamp_ms: u64, terms: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        TraceEntry { timestamp_ms, terms: terms.into_iter().map(Into::into).collect() }
    }

    /// Query identity used for locality: terms joined by single spaces, in
    /// their original order.
    pub fn key(&self) -> String {
        self.terms.join(" ")
    }
}

/// A time-ordered query log. Timestamps are milliseconds since trace start.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct QueryTrace {
    entries: Vec<TraceEntry>,
}

impl QueryTrace {
    /// Checks ordering and non-empty term lists.
    pub fn new(entries: Vec<TraceEntry>) -> Result<Self> {
        let mut previous = 0u64;
        for (i, e) in entries.iter().enumerate() {
            if e.terms.is_empty() || e.terms.iter().any(|t| t.is_empty() || t.contains(char::is_whitespace)) {
                return Err(Error::MalformedTrace { line: i + 1, reason: "empty or invalid term list".into() });
            }
            if e.timestamp_ms < previous {
                return Err(Error::NonMonotone { line: i + 1, timestamp: e.timestamp_ms, previous });
            }
            previous = e.timestamp_ms;
        }
        Ok(QueryTrace { entries })
    }

    pub fn entries(&self) -> &[TraceEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn keys(&self) -> Vec<String> {
        self.entries.iter().map(TraceEntry::key).collect()
    }

    /// Reads a trace file. Errors carry one-based line numbers.
    pub fn read<R: BufRead>(reader: R) -> Result<Self> {
        let mut entries = Vec::new();
        let mut previous = 0u64;
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let lineno = i + 1;
            let line = line.strip_suffix('\r').unwrap_or(&line);
            let malformed = |reason: &str| Error::MalformedTrace { line: lineno, reason: reason.into() };
            let (ts, body) = line.split_once('\t').ok_or_else(|| malformed("missing tab separator"))?;
            let timestamp_ms: u64 = ts.trim().parse().map_err(|_| malformed("invalid timestamp"))?;
            let terms: Vec<String> = body.split_ascii_whitespace().map(str::to_owned).collect();
            if terms.is_empty() {
                return Err(malformed("empty term list"));
            }
            if timestamp_ms < previous {
                return Err(Error::NonMonotone { line: lineno, timestamp: timestamp_ms, previous });
            }
            previous = timestamp_ms;
            entries.push(TraceEntry { timestamp_ms, terms });
        }
        Ok(QueryTrace { entries })
    }

    pub fn write<W: Write>(&self, out: &mut W) -> io::Result<()> {
        for e in &self.entries {
            write_entry(out, e)?;
        }
        Ok(())
    }
}

pub fn write_entry<W: Write + ?Sized>(out: &mut W, e: &TraceEntry) -> io::Result<()> {
    write!(out, "{}\t", e.timestamp_ms)?;
    for (i, t) in e.terms.iter().enumerate() {
        if i > 0 {
            out.write_all(b" ")?;
        }
        out.write_all(t.as_bytes())?;
    }
    out.write_all(b"\n")
}
