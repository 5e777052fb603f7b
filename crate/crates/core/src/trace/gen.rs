use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashSet};

use rand::Rng;

use super::model::TraceModel;
use super::reuse::ReuseDistance;
use super::{QueryTrace, TraceEntry};
use crate::error::{Error, Result};
use crate::rng::{open_unit, purpose_rng, Purpose, StreamRng};
use crate::sampling::Categorical;

/// Resampling attempts before a repeated new query is made unique by
/// appending further terms.
const MAX_NEW_QUERY_ATTEMPTS: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceTarget {
    Queries(u64),
    DurationMs(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Arrivals {
    /// Exponential inter-arrival times within each section.
    #[default]
    Poisson,
    /// `round(rate * seconds)` evenly spaced arrivals per section.
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceGenSpec {
    pub target: TraceTarget,
    pub rate_scale: f64,
    pub master_seed: u64,
    pub arrivals: Arrivals,
}

impl TraceGenSpec {
    pub fn queries(n: u64, master_seed: u64) -> Self {
        TraceGenSpec { target: TraceTarget::Queries(n), rate_scale: 1.0, master_seed, arrivals: Arrivals::Poisson }
    }

    pub fn duration(ms: u64, master_seed: u64) -> Self {
        TraceGenSpec { target: TraceTarget::DurationMs(ms), rate_scale: 1.0, master_seed, arrivals: Arrivals::Poisson }
    }

    pub fn check(&self) -> Result<()> {
        let target = match self.target {
            TraceTarget::Queries(n) | TraceTarget::DurationMs(n) => n,
        };
        if target == 0 {
            return Err(Error::InvalidArgument("trace target must be positive".into()));
        }
        if !(self.rate_scale.is_finite() && self.rate_scale > 0.0) {
            return Err(Error::InvalidArgument("rate scale must be positive".into()));
        }
        Ok(())
    }
}

/// Arrival-time stream: sections of `section_len_ms` cycling through
/// `rates` (requests per second, multiplied by `rate_scale`).
///
/// Ends only if every rate is zero.
pub struct Timestamps<R> {
    rates: Vec<f64>,
    section_len_ms: f64,
    arrivals: Arrivals,
    rng: R,
    section: u64,
    /// Poisson: time of the last arrival. Uniform: unused.
    now: f64,
    /// Uniform: arrivals emitted / planned in the current section.
    emitted: u64,
    planned: u64,
    exhausted: bool,
}

pub fn generate_timestamps<R: Rng>(
    section_rates: &[f64],
    section_len_ms: u64,
    rate_scale: f64,
    arrivals: Arrivals,
    rng: R,
) -> Result<Timestamps<R>> {
    if section_len_ms == 0 || section_rates.is_empty() {
        return Err(Error::InvalidArgument("need at least one section of positive length".into()));
    }
    if section_rates.iter().any(|r| !r.is_finite() || *r < 0.0) || !(rate_scale.is_finite() && rate_scale > 0.0) {
        return Err(Error::InvalidArgument("rates must be nonnegative and the scale positive".into()));
    }
    let rates: Vec<f64> = section_rates.iter().map(|r| r * rate_scale).collect();
    let exhausted = rates.iter().all(|&r| r == 0.0);
    let mut ts = Timestamps {
        rates,
        section_len_ms: section_len_ms as f64,
        arrivals,
        rng,
        section: 0,
        now: 0.0,
        emitted: 0,
        planned: 0,
        exhausted,
    };
    ts.planned = ts.plan(0);
    if arrivals == Arrivals::Uniform {
        ts.exhausted |= (0..ts.rates.len() as u64).all(|s| ts.plan(s) == 0);
    }
    Ok(ts)
}

impl<R: Rng> Timestamps<R> {
    fn rate(&self, section: u64) -> f64 {
        self.rates[(section % self.rates.len() as u64) as usize]
    }

    fn plan(&self, section: u64) -> u64 {
        match self.arrivals {
            Arrivals::Uniform => (self.rate(section) * self.section_len_ms / 1000.0).round() as u64,
            Arrivals::Poisson => 0,
        }
    }

    fn start(&self, section: u64) -> f64 {
        section as f64 * self.section_len_ms
    }

    fn advance_section(&mut self) {
        self.section += 1;
        self.now = self.start(self.section);
        self.emitted = 0;
        self.planned = self.plan(self.section);
    }
}

impl<R: Rng> Iterator for Timestamps<R> {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        if self.exhausted {
            return None;
        }
        loop {
            let end = self.start(self.section + 1);
            match self.arrivals {
                Arrivals::Poisson => {
                    let rate = self.rate(self.section);
                    if rate > 0.0 {
                        let gap_ms = -open_unit(&mut self.rng).ln() / rate * 1000.0;
                        let t = self.now + gap_ms;
                        if t < end {
                            self.now = t;
                            return Some(t as u64);
                        }
                    }
                }
                Arrivals::Uniform => {
                    if self.emitted < self.planned {
                        let offset = (self.emitted as f64 + 0.5) * self.section_len_ms / self.planned as f64;
                        self.emitted += 1;
                        return Some((self.start(self.section) + offset) as u64);
                    }
                }
            }
            self.advance_section();
        }
    }
}

/// LRU stack of query ids; the most recently used query is on top.
#[derive(Debug, Clone, Default)]
pub struct LruStack {
    // Top of stack is the last element.
    ids: Vec<u32>,
}

impl LruStack {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn depth(&self) -> usize {
        self.ids.len()
    }

    /// Query at `depth` (0 = top), if the stack is that deep.
    pub fn get(&self, depth: usize) -> Option<u32> {
        self.ids.len().checked_sub(depth + 1).map(|i| self.ids[i])
    }

    /// Moves the query at `depth` to the top and returns it.
    pub fn touch(&mut self, depth: usize) -> u32 {
        let i = self.ids.len() - 1 - depth;
        let id = self.ids.remove(i);
        self.ids.push(id);
        id
    }

    pub fn push(&mut self, id: u32) {
        self.ids.push(id);
    }

    /// Ids from top to bottom.
    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        self.ids.iter().rev().copied()
    }
}

/// Query content sampler and LRU-stack replay of the locality model.
///
/// Repetition structure comes from the reuse-distance distribution; the
/// rank-frequency term distribution only decides what new queries contain.
pub struct QuerySampler<'m> {
    model: &'m TraceModel,
    terms: Categorical<u32>,
    lengths: Categorical<u64>,
    distances: Option<Categorical<u64>>,
    cold: u64,
    owed: BinaryHeap<Reverse<u64>>,
    queries: Vec<Box<[u32]>>,
    known: HashSet<Box<[u32]>>,
    stack: LruStack,
}

/// Outcome of one locality step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Step {
    pub query: u32,
    pub cold: bool,
}

impl<'m> QuerySampler<'m> {
    pub fn new(model: &'m TraceModel) -> Result<Self> {
        if model.term_freq().is_empty() {
            return Err(Error::EmptyVocabulary);
        }
        let terms = Categorical::new(model.term_freq().iter().enumerate().map(|(i, (_, n))| (i as u32, *n)))?;
        let lengths = Categorical::new(model.terms_per_query().iter().map(|(&k, &n)| (k, n)))
            .map_err(|_| Error::InvalidModel("empty terms-per-query histogram".into()))?;
        let reuse = model.reuse();
        if reuse.total() == 0 {
            return Err(Error::EmptyLocality);
        }
        let distances = Categorical::new(reuse.counts.iter().map(|(&d, &n)| (d, n))).ok();
        Ok(QuerySampler {
            model,
            terms,
            lengths,
            distances,
            cold: reuse.cold,
            owed: BinaryHeap::new(),
            queries: Vec::new(),
            known: HashSet::new(),
            stack: LruStack::new(),
        })
    }

    /// Draws `k` from the terms-per-query histogram, then `k` terms
    /// independently from the term distribution.
    pub fn sample_new_query<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<u32> {
        let k = *self.lengths.sample(rng);
        (0..k).map(|_| *self.terms.sample(rng)).collect()
    }

    /// Draws a query not emitted before. After `MAX_NEW_QUERY_ATTEMPTS`
    /// collisions, extra terms are appended until the query is unseen;
    /// longer queries are always eventually new.
    fn fresh_query<R: Rng + ?Sized>(&mut self, rng: &mut R) -> u32 {
        let mut query = self.sample_new_query(rng);
        let mut attempts = 1;
        while self.known.contains(query.as_slice()) {
            if attempts < MAX_NEW_QUERY_ATTEMPTS {
                query = self.sample_new_query(rng);
                attempts += 1;
            } else {
                query.push(*self.terms.sample(rng));
            }
        }
        let id = self.queries.len() as u32;
        let query: Box<[u32]> = query.into_boxed_slice();
        self.known.insert(query.clone());
        self.queries.push(query);
        id
    }

    /// Samples `d` from the reuse histogram joined with Cold and applies
    /// [`step_with`](Self::step_with). A `d` beyond the stack depth becomes a
    /// new query and is owed: a later Cold draw is replaced by the smallest
    /// owed distance once the stack is deep enough. Cold and reuse counts
    /// then converge to the model's, and every drawn distance is eventually
    /// emitted unless the trace ends first.
    pub fn locality_step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Step {
        let reuse_total = self.distances.as_ref().map_or(0, Categorical::total);
        let depth = self.stack.depth() as u64;
        let d = match &self.distances {
            Some(distances) if rng.gen_range(0..self.cold + reuse_total) >= self.cold => {
                ReuseDistance::Distance(*distances.sample(rng))
            }
            _ => match self.owed.peek() {
                Some(&Reverse(d)) if d < depth => {
                    self.owed.pop();
                    ReuseDistance::Distance(d)
                }
                _ => ReuseDistance::Cold,
            },
        };
        let step = self.step_with(d, rng);
        if let (true, ReuseDistance::Distance(d)) = (step.cold, d) {
            self.owed.push(Reverse(d));
        }
        step
    }

    /// Applies one step for a given `d`: Cold, or `d` at least the stack
    /// depth, emits a new query and pushes it; otherwise the query at depth
    /// `d` is re-emitted and moved to the top.
    pub fn step_with<R: Rng + ?Sized>(&mut self, d: ReuseDistance, rng: &mut R) -> Step {
        match d {
            ReuseDistance::Distance(d) if (d as usize) < self.stack.depth() => {
                Step { query: self.stack.touch(d as usize), cold: false }
            }
            _ => {
                let id = self.fresh_query(rng);
                self.stack.push(id);
                Step { query: id, cold: true }
            }
        }
    }

    pub fn stack(&self) -> &LruStack {
        &self.stack
    }

    pub fn terms(&self, query: u32) -> Vec<String> {
        self.queries[query as usize]
            .iter()
            .map(|&t| self.model.term_freq()[t as usize].0.clone())
            .collect()
    }
}

/// Streaming synthetic trace: timestamps from the timing model, contents
/// from the locality and semantic models. Content and timing use separate
/// substreams of the master seed.
pub struct TraceGenerator<'m> {
    sampler: QuerySampler<'m>,
    content_rng: StreamRng,
    timestamps: Timestamps<StreamRng>,
    target: TraceTarget,
    emitted: u64,
    cold: u64,
}

impl<'m> TraceGenerator<'m> {
    pub fn new(model: &'m TraceModel, spec: &TraceGenSpec) -> Result<Self> {
        spec.check()?;
        model.check()?;
        let sampler = QuerySampler::new(model)?;
        let timestamps = generate_timestamps(
            model.section_rates(),
            model.section_len_ms(),
            spec.rate_scale,
            spec.arrivals,
            purpose_rng(spec.master_seed, Purpose::TraceTiming),
        )?;
        if timestamps.exhausted && matches!(spec.target, TraceTarget::Queries(_)) {
            return Err(Error::UnreachableTarget);
        }
        Ok(TraceGenerator {
            sampler,
            content_rng: purpose_rng(spec.master_seed, Purpose::TraceContent),
            timestamps,
            target: spec.target,
            emitted: 0,
            cold: 0,
        })
    }

    /// New (first-occurrence) queries emitted so far.
    pub fn cold_emitted(&self) -> u64 {
        self.cold
    }
}

impl Iterator for TraceGenerator<'_> {
    type Item = TraceEntry;

    fn next(&mut self) -> Option<TraceEntry> {
        if let TraceTarget::Queries(n) = self.target {
            if self.emitted >= n {
                return None;
            }
        }
        let timestamp_ms = self.timestamps.next()?;
        if let TraceTarget::DurationMs(d) = self.target {
            if timestamp_ms >= d {
                return None;
            }
        }
        let step = self.sampler.locality_step(&mut self.content_rng);
        self.emitted += 1;
        self.cold += step.cold as u64;
        Some(TraceEntry { timestamp_ms, terms: self.sampler.terms(step.query) })
    }
}

/// Generates a complete synthetic trace in memory.
pub fn generate_trace(model: &TraceModel, spec: &TraceGenSpec) -> Result<QueryTrace> {
    let entries: Vec<TraceEntry> = TraceGenerator::new(model, spec)?.collect();
    QueryTrace::new(entries)
}
