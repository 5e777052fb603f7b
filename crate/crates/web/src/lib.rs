//! Browser demo: Zipf fitting, a trace locality roundtrip and corpus
//! expansion from pasted text. Each operation is a plain function returning
//! a serializable result; the `wasm_bindgen` wrappers return it as JSON.

use rand::SeedableRng;
use serde::Serialize;
use wasm_bindgen::prelude::*;

use seedgen_core::corpus::{analyze_corpus_reader, CorpusSampler, GenerationSpec};
use seedgen_core::rng::StreamRng;
use seedgen_core::stats::{validate_corpus, validate_trace, CorpusThresholds, TraceThresholds, ValidationReport};
use seedgen_core::trace::reference::{reference_trace, ReferenceTraceParams, ZipfTable};
use seedgen_core::trace::{analyze_trace, fit_zipf, generate_trace, TraceGenSpec, TraceModel};

/// Demo inputs are capped so a click never freezes the page for long.
pub const MAX_DRAWS: u64 = 2_000_000;
pub const MAX_QUERIES: u64 = 200_000;
pub const MAX_DOCS: u64 = 20_000;
const SECTION_MS: u64 = 60_000;
const MIN_FREQ: u64 = 5;
const SAMPLE_LINES: usize = 12;

type DemoResult<T> = Result<T, String>;

fn bounded(name: &str, value: u64, max: u64) -> DemoResult<u64> {
    if (1..=max).contains(&value) {
        Ok(value)
    } else {
        Err(format!("{name} must be between 1 and {max}"))
    }
}

#[derive(Debug, Serialize)]
pub struct ZipfDemo {
    pub s: f64,
    pub r2: f64,
    pub ranks_used: usize,
    /// `(rank, frequency)` for ranks spaced evenly in log scale.
    pub points: Vec<(u64, u64)>,
}

/// Draws from Zipf(`s`, `vocabulary`) and fits the exponent back.
pub fn zipf_demo(s: f64, vocabulary: u64, draws: u64, seed: u64) -> DemoResult<ZipfDemo> {
    if !(s.is_finite() && (0.0..=4.0).contains(&s)) {
        return Err("s must be between 0 and 4".into());
    }
    let vocabulary = bounded("vocabulary", vocabulary, 100_000)?;
    let draws = bounded("draws", draws, MAX_DRAWS)?;
    let table = ZipfTable::new(vocabulary as usize, s).map_err(|e| e.to_string())?;
    let mut rng = StreamRng::seed_from_u64(seed);
    let mut counts = vec![0u64; vocabulary as usize];
    for _ in 0..draws {
        counts[table.sample(&mut rng)] += 1;
    }
    counts.sort_unstable_by(|a, b| b.cmp(a));
    let freqs: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    let fit = fit_zipf(&freqs, MIN_FREQ as f64).map_err(|e| e.to_string())?;
    let mut points = Vec::new();
    let mut rank = 1f64;
    while (rank as usize) <= counts.len() && counts[rank as usize - 1] > 0 {
        let r = rank as u64;
        if !matches!(points.last(), Some(&(last, _)) if last == r) {
            points.push((r, counts[r as usize - 1]));
        }
        rank *= 1.05;
    }
    Ok(ZipfDemo { s: fit.s, r2: fit.r2, ranks_used: fit.ranks_used, points })
}

#[derive(Debug, Serialize)]
pub struct TraceDemo {
    pub seed_queries: usize,
    pub synthetic_queries: usize,
    pub seed_cold_fraction: f64,
    pub synthetic_cold_fraction: f64,
    /// `(distance, cumulative fraction of recurrences)`, seed and synthetic.
    pub seed_cdf: Vec<(u64, f64)>,
    pub synthetic_cdf: Vec<(u64, f64)>,
    pub report: ValidationReport,
}

fn finite_cdf(model: &TraceModel) -> Vec<(u64, f64)> {
    let total = model.reuse().counts.values().sum::<u64>().max(1) as f64;
    let mut acc = 0u64;
    model
        .reuse()
        .counts
        .iter()
        .map(|(&d, &c)| {
            acc += c;
            (d, acc as f64 / total)
        })
        .collect()
}

/// Builds a ground-truth trace, learns its model, generates the same volume
/// from the model and compares the two.
pub fn trace_demo(catalog: u64, queries: u64, seed: u64) -> DemoResult<TraceDemo> {
    let catalog = bounded("catalog", catalog, 1_000_000)?;
    let queries = bounded("queries", queries, MAX_QUERIES)?;
    let params = ReferenceTraceParams { catalog: catalog as usize, queries, seed, ..Default::default() };
    let full = reference_trace(&params).map_err(|e| e.to_string())?;
    let end = full.entries().last().map_or(0, |e| e.timestamp_ms) / SECTION_MS * SECTION_MS;
    if end == 0 {
        return Err("too few queries for one whole minute; raise the query count".into());
    }
    let kept = full.entries().iter().filter(|e| e.timestamp_ms < end).cloned().collect();
    let trace = seedgen_core::trace::QueryTrace::new(kept).map_err(|e| e.to_string())?;
    let model = analyze_trace(&trace, SECTION_MS, MIN_FREQ).map_err(|e| e.to_string())?;
    let synthetic = generate_trace(&model, &TraceGenSpec::duration(end, seed ^ 0x9e37_79b9)).map_err(|e| e.to_string())?;
    let th = TraceThresholds { duration_ms: Some(end), ..Default::default() };
    let report = validate_trace(&model, &synthetic, &th).map_err(|e| e.to_string())?;
    let back = analyze_trace(&synthetic, SECTION_MS, MIN_FREQ).map_err(|e| e.to_string())?;
    Ok(TraceDemo {
        seed_queries: trace.len(),
        synthetic_queries: synthetic.len(),
        seed_cold_fraction: model.cold_fraction(),
        synthetic_cold_fraction: back.cold_fraction(),
        seed_cdf: finite_cdf(&model),
        synthetic_cdf: finite_cdf(&back),
        report,
    })
}

#[derive(Debug, Serialize)]
pub struct CorpusDemo {
    pub seed_docs: u64,
    pub classes: Vec<(String, u64)>,
    pub vocabulary: usize,
    pub synthetic_docs: u64,
    pub sample: Vec<String>,
    pub report: ValidationReport,
}

/// Analyzes `label<TAB>tokens` lines and expands them to `docs` documents.
pub fn corpus_demo(text: &str, docs: u64, seed: u64) -> DemoResult<CorpusDemo> {
    let docs = bounded("docs", docs, MAX_DOCS)?;
    let text: String = text.lines().filter(|l| !l.trim().is_empty()).flat_map(|l| [l, "\n"]).collect();
    let model = analyze_corpus_reader(text.as_bytes()).map_err(|e| e.to_string())?;
    let sampler = CorpusSampler::new(&model).map_err(|e| e.to_string())?;
    let spec = GenerationSpec::docs(docs, seed);
    let generated: Vec<_> = sampler.documents(spec).map_err(|e| e.to_string())?.collect();
    let sample = generated.iter().take(SAMPLE_LINES).map(|d| format!("{}\t{}", d.label, d.tokens.join(" "))).collect();
    let report = validate_corpus(&model, generated.into_iter().map(Ok), &CorpusThresholds::default())
        .map_err(|e| e.to_string())?;
    Ok(CorpusDemo {
        seed_docs: model.total_docs(),
        classes: model.classes().iter().map(|(l, c)| (l.clone(), c.doc_count)).collect(),
        vocabulary: model.vocabulary().len(),
        synthetic_docs: docs,
        sample,
        report,
    })
}

fn to_json<T: Serialize>(r: DemoResult<T>) -> Result<String, JsError> {
    let value = r.map_err(|e| JsError::new(&e))?;
    serde_json::to_string(&value).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen(js_name = zipfDemo)]
pub fn zipf_demo_js(s: f64, vocabulary: u32, draws: u32, seed: u32) -> Result<String, JsError> {
    to_json(zipf_demo(s, vocabulary.into(), draws.into(), seed.into()))
}

#[wasm_bindgen(js_name = traceDemo)]
pub fn trace_demo_js(catalog: u32, queries: u32, seed: u32) -> Result<String, JsError> {
    to_json(trace_demo(catalog.into(), queries.into(), seed.into()))
}

#[wasm_bindgen(js_name = corpusDemo)]
pub fn corpus_demo_js(text: &str, docs: u32, seed: u32) -> Result<String, JsError> {
    to_json(corpus_demo(text, docs.into(), seed.into()))
}
