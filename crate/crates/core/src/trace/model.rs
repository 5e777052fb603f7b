use std::collections::{BTreeMap, HashMap};
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::reuse::{compute_reuse_distances, ReuseHistogram};
use super::zipf::{fit_zipf, ZipfFit};
use super::QueryTrace;
use crate::error::{Error, Result};
use crate::persist::{self, int_keys, SCHEMA_VERSION};

/// Minimum term frequency for a rank to take part in the Zipf fit.
pub const DEFAULT_MIN_FREQ: u64 = 5;

/// Semantic, locality and timing model of a query trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceModel {
    /// Terms by rank: descending count, ties broken lexicographically.
    term_freq: Vec<(String, u64)>,
    /// `None` when too few terms clear the frequency cutoff to fit a line.
    zipf: Option<ZipfFit>,
    terms_per_query: BTreeMap<u64, u64>,
    reuse: ReuseHistogram,
    section_len_ms: u64,
    section_rates: Vec<f64>,
    query_count: u64,
}

impl TraceModel {
    pub fn term_freq(&self) -> &[(String, u64)] {
        &self.term_freq
    }

    pub fn zipf(&self) -> Option<ZipfFit> {
        self.zipf
    }

    pub fn terms_per_query(&self) -> &BTreeMap<u64, u64> {
        &self.terms_per_query
    }

    pub fn reuse(&self) -> &ReuseHistogram {
        &self.reuse
    }

    pub fn section_len_ms(&self) -> u64 {
        self.section_len_ms
    }

    /// Requests per second in each section.
    pub fn section_rates(&self) -> &[f64] {
        &self.section_rates
    }

    pub fn query_count(&self) -> u64 {
        self.query_count
    }

    /// Fraction of requests that were first occurrences.
    pub fn cold_fraction(&self) -> f64 {
        self.reuse.cold as f64 / self.query_count as f64
    }

    /// Builds a model from its parts, ranking `term_counts` and checking
    /// the invariants. `zipf` is taken as given.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        term_counts: impl IntoIterator<Item = (String, u64)>,
        zipf: Option<ZipfFit>,
        terms_per_query: BTreeMap<u64, u64>,
        reuse: ReuseHistogram,
        section_len_ms: u64,
        section_rates: Vec<f64>,
    ) -> Result<Self> {
        let term_freq = rank_terms(term_counts);
        let query_count = reuse.total();
        let model = TraceModel { term_freq, zipf, terms_per_query, reuse, section_len_ms, section_rates, query_count };
        model.check()?;
        Ok(model)
    }

    pub fn check(&self) -> Result<()> {
        let invalid = |msg: &str| Err(Error::InvalidModel(msg.to_owned()));
        if self.section_len_ms == 0 {
            return invalid("section length must be positive");
        }
        if self.reuse.total() != self.query_count {
            return invalid("reuse histogram and cold count do not sum to the query count");
        }
        if self.terms_per_query.values().sum::<u64>() != self.query_count {
            return invalid("terms-per-query histogram does not sum to the query count");
        }
        if self.terms_per_query.contains_key(&0) {
            return invalid("queries must have at least one term");
        }
        if self.section_rates.iter().any(|r| !r.is_finite() || *r < 0.0) {
            return invalid("section rates must be finite and nonnegative");
        }
        if let Some(z) = self.zipf {
            if !(z.s >= 0.0 && (0.0..=1.0).contains(&z.r2)) {
                return invalid("Zipf exponent must be nonnegative with r2 in [0, 1]");
            }
        }
        if self.term_freq.windows(2).any(|w| (w[1].1, &w[0].0) > (w[0].1, &w[1].0)) {
            return invalid("term ranks out of order");
        }
        Ok(())
    }

    pub fn save<W: Write>(&self, out: W) -> Result<()> {
        let file = TraceModelFile {
            cold_count: self.reuse.cold,
            query_count: self.query_count,
            reuse_hist: self.reuse.counts.clone(),
            schema_version: SCHEMA_VERSION,
            section_len_ms: self.section_len_ms,
            section_rates: self.section_rates.clone(),
            term_freq: self.term_freq.iter().cloned().collect(),
            terms_per_query: self.terms_per_query.clone(),
            zipf_r2: self.zipf.map(|z| z.r2),
            zipf_ranks_used: self.zipf.map(|z| z.ranks_used),
            zipf_s: self.zipf.map(|z| z.s),
        };
        persist::save(&file, out)
    }

    pub fn load<R: Read>(input: R) -> Result<Self> {
        let f: TraceModelFile = persist::load(input)?;
        let zipf = match (f.zipf_s, f.zipf_r2, f.zipf_ranks_used) {
            (Some(s), Some(r2), Some(ranks_used)) => Some(ZipfFit { s, r2, ranks_used }),
            (None, None, None) => None,
            _ => return Err(Error::ModelFormat("partial Zipf fit".into())),
        };
        let reuse = ReuseHistogram { counts: f.reuse_hist, cold: f.cold_count };
        let model = TraceModel::from_parts(f.term_freq, zipf, f.terms_per_query, reuse, f.section_len_ms, f.section_rates)?;
        if model.query_count != f.query_count {
            return Err(Error::InvalidModel("query_count disagrees with the reuse histogram".into()));
        }
        Ok(model)
    }
}

fn rank_terms(counts: impl IntoIterator<Item = (String, u64)>) -> Vec<(String, u64)> {
    let mut ranked: Vec<(String, u64)> = counts.into_iter().filter(|(_, n)| *n > 0).collect();
    ranked.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TraceModelFile {
    cold_count: u64,
    query_count: u64,
    #[serde(with = "int_keys")]
    reuse_hist: BTreeMap<u64, u64>,
    schema_version: u64,
    section_len_ms: u64,
    section_rates: Vec<f64>,
    term_freq: BTreeMap<String, u64>,
    #[serde(with = "int_keys")]
    terms_per_query: BTreeMap<u64, u64>,
    zipf_r2: Option<f64>,
    zipf_ranks_used: Option<usize>,
    zipf_s: Option<f64>,
}

/// Builds the semantic, locality and timing models of `trace`.
///
/// Sections are aligned to timestamp 0: section `i` covers
/// `[i * section_len_ms, (i + 1) * section_len_ms)` and its rate is its
/// request count divided by the section length in seconds. `min_freq` is
/// the Zipf-fit frequency cutoff.
pub fn analyze_trace(trace: &QueryTrace, section_len_ms: u64, min_freq: u64) -> Result<TraceModel> {
    if trace.is_empty() {
        return Err(Error::EmptyTrace);
    }
    if section_len_ms == 0 {
        return Err(Error::InvalidArgument("section length must be positive".into()));
    }
    let entries = trace.entries();

    let mut term_counts: HashMap<&str, u64> = HashMap::new();
    let mut terms_per_query: BTreeMap<u64, u64> = BTreeMap::new();
    for e in entries {
        for t in &e.terms {
            *term_counts.entry(t.as_str()).or_default() += 1;
        }
        *terms_per_query.entry(e.terms.len() as u64).or_default() += 1;
    }
    let term_freq = rank_terms(term_counts.into_iter().map(|(t, n)| (t.to_owned(), n)));
    let freqs: Vec<f64> = term_freq.iter().map(|(_, n)| *n as f64).collect();
    let zipf = match fit_zipf(&freqs, min_freq as f64) {
        Ok(fit) => Some(fit),
        Err(Error::InsufficientZipfMass) => None,
        Err(e) => return Err(e),
    };

    let keys = trace.keys();
    let (_, reuse) = compute_reuse_distances(&keys);

    let last = entries.last().expect("non-empty").timestamp_ms;
    let sections = (last / section_len_ms + 1) as usize;
    let mut counts = vec![0u64; sections];
    for e in entries {
        counts[(e.timestamp_ms / section_len_ms) as usize] += 1;
    }
    let seconds = section_len_ms as f64 / 1000.0;
    let section_rates = counts.iter().map(|&c| c as f64 / seconds).collect();

    let model = TraceModel {
        term_freq,
        zipf,
        terms_per_query,
        reuse,
        section_len_ms,
        section_rates,
        query_count: entries.len() as u64,
    };
    debug_assert!(model.check().is_ok());
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::TraceEntry;

    fn trace(entries: &[(u64, &str)]) -> QueryTrace {
        QueryTrace::new(
            entries
                .iter()
                .map(|(t, q)| TraceEntry::new(*t, q.split(' ')))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn single_section_rate() {
        let m = analyze_trace(&trace(&[(0, "a"), (100, "b"), (500, "a"), (999, "c")]), 1000, 5).unwrap();
        assert_eq!(m.section_rates(), [4.0]);
    }

    #[test]
    fn two_section_rates() {
        let m = analyze_trace(&trace(&[(0, "a"), (500, "b"), (1500, "c")]), 1000, 5).unwrap();
        assert_eq!(m.section_rates(), [2.0, 1.0]);
    }

    #[test]
    fn empty_sections_have_zero_rate() {
        let m = analyze_trace(&trace(&[(0, "a"), (2500, "b")]), 1000, 5).unwrap();
        assert_eq!(m.section_rates(), [1.0, 0.0, 1.0]);
    }

    #[test]
    fn rates_scale_with_section_length() {
        let m = analyze_trace(&trace(&[(0, "a"), (10, "b")]), 500, 5).unwrap();
        assert_eq!(m.section_rates(), [4.0]);
    }

    #[test]
    fn semantic_and_locality_counts() {
        let t = trace(&[(0, "cheap flights"), (1, "weather"), (2, "cheap flights"), (3, "flights cheap")]);
        let m = analyze_trace(&t, 1000, 5).unwrap();
        assert_eq!(
            m.term_freq(),
            [("cheap".to_string(), 3), ("flights".to_string(), 3), ("weather".to_string(), 1)]
        );
        assert_eq!(m.terms_per_query(), &BTreeMap::from([(1, 1), (2, 3)]));
        // Term order matters for query identity.
        assert_eq!(m.reuse().cold, 3);
        assert_eq!(m.reuse().counts, BTreeMap::from([(1, 1)]));
        assert_eq!(m.query_count(), 4);
        assert!(m.zipf().is_none());
    }

    #[test]
    fn zipf_fit_attached_when_mass_suffices() {
        let mut entries = Vec::new();
        for (term, n) in [("a", 40), ("b", 20), ("c", 13), ("d", 10)] {
            for _ in 0..n {
                entries.push((0, term));
            }
        }
        let m = analyze_trace(&trace(&entries), 1000, 5).unwrap();
        let z = m.zipf().unwrap();
        assert!((z.s - 1.0).abs() < 0.02, "{z:?}");
    }

    #[test]
    fn ties_rank_lexicographically() {
        let m = analyze_trace(&trace(&[(0, "b"), (0, "a"), (0, "c"), (0, "a")]), 1000, 5).unwrap();
        let ranked: Vec<&str> = m.term_freq().iter().map(|(t, _)| t.as_str()).collect();
        assert_eq!(ranked, ["a", "b", "c"]);
    }

    #[test]
    fn errors() {
        assert!(matches!(analyze_trace(&QueryTrace::default(), 1000, 5), Err(Error::EmptyTrace)));
        assert!(analyze_trace(&trace(&[(0, "a")]), 0, 5).is_err());
    }

    #[test]
    fn save_load_roundtrip() {
        let t = trace(&[(0, "a b"), (10, "a"), (1200, "a b"), (1300, "c")]);
        let m = analyze_trace(&t, 1000, 1).unwrap();
        assert!(m.zipf().is_some());
        let mut buf = Vec::new();
        m.save(&mut buf).unwrap();
        let back = TraceModel::load(buf.as_slice()).unwrap();
        assert_eq!(back, m);
        let mut again = Vec::new();
        back.save(&mut again).unwrap();
        assert_eq!(buf, again);
    }

    #[test]
    fn load_rejects_inconsistent_counts() {
        let t = trace(&[(0, "a"), (10, "a")]);
        let m = analyze_trace(&t, 1000, 5).unwrap();
        let mut buf = Vec::new();
        m.save(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap().replace("\"cold_count\": 1", "\"cold_count\": 2");
        assert!(matches!(TraceModel::load(text.as_bytes()), Err(Error::InvalidModel(_))));
        assert!(matches!(TraceModel::load(&b"  \n"[..]), Err(Error::Truncated)));
    }
}
