//! Reference query traces with known structure.
//!
//! Requests are drawn independently from a fixed catalog of queries with
//! Zipf-distributed popularity (the independent reference model); query
//! contents are drawn from a Zipf-distributed term vocabulary. These serve
//! as ground-truth seeds when no real trace is at hand.

use std::collections::HashSet;

use rand::Rng;

use super::gen::{generate_timestamps, Arrivals};
use super::{QueryTrace, TraceEntry};
use crate::error::{Error, Result};
use crate::rng::{purpose_rng, Purpose};

/// Zipf distribution over ranks `1..=n` by cumulative table inversion.
#[derive(Debug, Clone)]
pub struct ZipfTable {
    cumulative: Vec<f64>,
}

impl ZipfTable {
    pub fn new(n: usize, s: f64) -> Result<Self> {
        if n == 0 || !(s.is_finite() && s >= 0.0) {
            return Err(Error::InvalidArgument("Zipf table needs n >= 1 and s >= 0".into()));
        }
        let mut acc = 0.0;
        let cumulative = (1..=n)
            .map(|r| {
                acc += (r as f64).powf(-s);
                acc
            })
            .collect();
        Ok(ZipfTable { cumulative })
    }

    /// Zero-based rank.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let total = *self.cumulative.last().expect("non-empty");
        let u = rng.gen::<f64>() * total;
        self.cumulative.partition_point(|&c| c <= u).min(self.cumulative.len() - 1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceTraceParams {
    pub vocabulary: usize,
    pub term_s: f64,
    pub catalog: usize,
    pub popularity_s: f64,
    /// Weights of queries with 1, 2, ... terms.
    pub terms_per_query: Vec<u64>,
    pub section_rates: Vec<f64>,
    pub section_len_ms: u64,
    pub queries: u64,
    pub seed: u64,
}

impl Default for ReferenceTraceParams {
    fn default() -> Self {
        ReferenceTraceParams {
            vocabulary: 5_000,
            term_s: 1.0,
            catalog: 50_000,
            popularity_s: 0.9,
            terms_per_query: vec![5, 3, 2],
            section_rates: vec![20.0, 30.0, 40.0, 50.0, 40.0, 30.0],
            section_len_ms: 60_000,
            queries: 10_000,
            seed: 1,
        }
    }
}

pub fn term_name(rank: usize) -> String {
    format!("t{rank}")
}

pub fn reference_trace(p: &ReferenceTraceParams) -> Result<QueryTrace> {
    if p.catalog == 0 || p.queries == 0 || p.terms_per_query.iter().all(|&w| w == 0) {
        return Err(Error::InvalidArgument("reference trace needs a catalog, queries and query lengths".into()));
    }
    let mut rng = purpose_rng(p.seed, Purpose::Reference);
    let terms = ZipfTable::new(p.vocabulary, p.term_s)?;
    let lengths = crate::sampling::Categorical::new(
        p.terms_per_query.iter().enumerate().map(|(i, &w)| (i + 1, w)),
    )?;

    let mut seen = HashSet::new();
    let mut catalog: Vec<Vec<String>> = Vec::with_capacity(p.catalog);
    let mut attempts = 0usize;
    while catalog.len() < p.catalog {
        attempts += 1;
        if attempts > p.catalog * 1000 {
            return Err(Error::InvalidArgument("vocabulary too small for a catalog of distinct queries".into()));
        }
        let k = *lengths.sample(&mut rng);
        let query: Vec<String> = (0..k).map(|_| term_name(terms.sample(&mut rng))).collect();
        if seen.insert(query.join(" ")) {
            catalog.push(query);
        }
    }

    let popularity = ZipfTable::new(p.catalog, p.popularity_s)?;
    let timestamps = generate_timestamps(&p.section_rates, p.section_len_ms, 1.0, Arrivals::Poisson, purpose_rng(p.seed, Purpose::TraceTiming))?;
    let entries: Vec<TraceEntry> = timestamps
        .take(p.queries as usize)
        .map(|timestamp_ms| TraceEntry { timestamp_ms, terms: catalog[popularity.sample(&mut rng)].clone() })
        .collect();
    if (entries.len() as u64) < p.queries {
        return Err(Error::UnreachableTarget);
    }
    QueryTrace::new(entries)
}
