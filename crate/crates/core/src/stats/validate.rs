use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{cdf_from_counts, chi_square_test, kl_divergence, ks_statistic};
use crate::corpus::{CorpusAnalyzer, CorpusModel};
use crate::document::Document;
use crate::error::{Error, Result};
use crate::trace::{analyze_trace, QueryTrace, TraceModel, DEFAULT_MIN_FREQ};

/// One comparison between seed and synthetic data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub seed_value: f64,
    pub synthetic_value: f64,
    pub statistic: f64,
    pub threshold: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
    pub pass: bool,
}

impl ValidationReport {
    fn new(checks: Vec<Check>) -> Self {
        debug_assert!(checks.iter().all(|c| c.statistic.is_finite()));
        let pass = checks.iter().all(|c| c.pass);
        ValidationReport { checks, pass }
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn write_json<W: Write>(&self, mut out: W) -> Result<()> {
        serde_json::to_writer_pretty(&mut out, self).map_err(|e| Error::Io(e.into()))?;
        out.write_all(b"\n")?;
        Ok(())
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(5).max(5);
        writeln!(
            f,
            "{:<width$}  {:>12}  {:>12}  {:>12}  {:>10}  result",
            "check", "seed", "synthetic", "statistic", "threshold"
        )?;
        for c in &self.checks {
            writeln!(
                f,
                "{:<width$}  {:>12.6}  {:>12.6}  {:>12.6}  {:>10.4}  {}",
                c.name,
                c.seed_value,
                c.synthetic_value,
                c.statistic,
                c.threshold,
                if c.pass { "PASS" } else { "FAIL" }
            )?;
        }
        write!(f, "overall: {}", if self.pass { "PASS" } else { "FAIL" })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorpusThresholds {
    /// Minimum chi-square p-value for the class distribution.
    pub class_alpha: f64,
    /// Maximum per-class KL divergence D(synthetic || seed) of words.
    pub word_kl: f64,
    /// Maximum per-class KS distance between length distributions.
    pub length_ks: f64,
}

impl Default for CorpusThresholds {
    fn default() -> Self {
        CorpusThresholds { class_alpha: 0.001, word_kl: 0.02, length_ks: 0.05 }
    }
}

/// Compares a seed corpus model with a synthetic corpus.
pub fn validate_corpus<I>(seed: &CorpusModel, synthetic: I, th: &CorpusThresholds) -> Result<ValidationReport>
where
    I: IntoIterator<Item = Result<Document>>,
{
    let mut analyzer = CorpusAnalyzer::new();
    for (i, doc) in synthetic.into_iter().enumerate() {
        analyzer.add(&doc?, i)?;
    }
    let synth = analyzer.finish()?;
    validate_corpus_model(seed, &synth, th)
}

/// Like [`validate_corpus`] for an already analyzed synthetic corpus.
pub fn validate_corpus_model(seed: &CorpusModel, synth: &CorpusModel, th: &CorpusThresholds) -> Result<ValidationReport> {
    let mut checks = Vec::new();

    for label in synth.classes().keys().filter(|l| !seed.classes().contains_key(*l)) {
        checks.push(Check {
            name: format!("class[{label}].in_seed"),
            seed_value: 0.0,
            synthetic_value: synth.classes()[label].doc_count as f64,
            statistic: 1.0,
            threshold: 0.0,
            pass: false,
        });
    }

    let observed: BTreeMap<String, u64> = synth.classes().iter().map(|(l, c)| (l.clone(), c.doc_count)).collect();
    let chi = chi_square_test(&observed, &seed.class_distribution(), synth.total_docs())?;
    checks.push(Check {
        name: "class_distribution.chi2_p".into(),
        seed_value: seed.classes().len() as f64,
        synthetic_value: synth.classes().len() as f64,
        statistic: chi.p_value,
        threshold: th.class_alpha,
        pass: chi.p_value >= th.class_alpha,
    });

    for (label, seed_class) in seed.classes() {
        let Some(synth_class) = synth.classes().get(label) else {
            checks.push(Check {
                name: format!("class[{label}].present"),
                seed_value: seed_class.doc_count as f64,
                synthetic_value: 0.0,
                statistic: 1.0,
                threshold: 0.0,
                pass: false,
            });
            continue;
        };
        let kl = kl_divergence(&synth.word_distribution(label)?, &seed.word_distribution(label)?)?;
        checks.push(Check {
            name: format!("class[{label}].word_kl"),
            seed_value: seed_class.word_counts.len() as f64,
            synthetic_value: synth_class.word_counts.len() as f64,
            statistic: kl,
            threshold: th.word_kl,
            pass: kl <= th.word_kl,
        });
        let ks = ks_statistic(
            &cdf_from_counts(&seed_class.length_histogram),
            &cdf_from_counts(&synth_class.length_histogram),
        )?;
        checks.push(Check {
            name: format!("class[{label}].length_ks"),
            seed_value: mean_length(&seed_class.length_histogram),
            synthetic_value: mean_length(&synth_class.length_histogram),
            statistic: ks,
            threshold: th.length_ks,
            pass: ks <= th.length_ks,
        });
    }
    Ok(ValidationReport::new(checks))
}

fn mean_length(hist: &BTreeMap<u64, u64>) -> f64 {
    let n: u64 = hist.values().sum();
    hist.iter().map(|(l, c)| l * c).sum::<u64>() as f64 / n as f64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceThresholds {
    /// Maximum absolute difference of fitted Zipf exponents.
    pub zipf_tolerance: f64,
    /// Maximum KS distance between reuse-distance CDFs (cold = infinity).
    pub reuse_ks: f64,
    /// Maximum relative error of each section's rate.
    pub rate_relative: f64,
    /// Rate multiplier the synthetic trace was generated with.
    pub rate_scale: f64,
    /// Length of the generated trace; when set, only sections that end
    /// within it are compared. Otherwise every section up to the last
    /// request counts as complete.
    pub duration_ms: Option<u64>,
    pub min_freq: u64,
}

impl Default for TraceThresholds {
    fn default() -> Self {
        TraceThresholds {
            zipf_tolerance: 0.1,
            reuse_ks: 0.05,
            rate_relative: 0.10,
            rate_scale: 1.0,
            duration_ms: None,
            min_freq: DEFAULT_MIN_FREQ,
        }
    }
}

/// Compares a seed trace model with a synthetic trace.
pub fn validate_trace(seed: &TraceModel, synthetic: &QueryTrace, th: &TraceThresholds) -> Result<ValidationReport> {
    let synth = analyze_trace(synthetic, seed.section_len_ms(), th.min_freq)?;
    let required = seed.section_rates().len();
    let covered = match th.duration_ms {
        Some(d) => (d / seed.section_len_ms()) as usize,
        None => synth.section_rates().len(),
    };
    if covered < required {
        return Err(Error::TraceTooShort { covered, required });
    }

    let mut checks = Vec::new();
    if let Some(seed_fit) = seed.zipf() {
        let synth_s = synth.zipf().map_or(0.0, |z| z.s);
        let diff = (seed_fit.s - synth_s).abs();
        checks.push(Check {
            name: "zipf_s".into(),
            seed_value: seed_fit.s,
            synthetic_value: synth_s,
            statistic: diff,
            threshold: th.zipf_tolerance,
            pass: synth.zipf().is_some() && diff <= th.zipf_tolerance,
        });
    }

    let ks = ks_statistic(&seed.reuse().cdf(), &synth.reuse().cdf())?;
    checks.push(Check {
        name: "reuse_distance_ks".into(),
        seed_value: seed.cold_fraction(),
        synthetic_value: synth.cold_fraction(),
        statistic: ks,
        threshold: th.reuse_ks,
        pass: ks <= th.reuse_ks,
    });

    let synth_rates = synth.section_rates();
    for i in 0..covered {
        let expected = seed.section_rates()[i % required];
        let observed = synth_rates.get(i).copied().unwrap_or(0.0) / th.rate_scale;
        let (statistic, pass) = if expected > 0.0 {
            let rel = (observed - expected).abs() / expected;
            (rel, rel <= th.rate_relative)
        } else {
            (observed, observed == 0.0)
        };
        checks.push(Check {
            name: format!("section[{i}].rate"),
            seed_value: expected,
            synthetic_value: observed,
            statistic,
            threshold: if expected > 0.0 { th.rate_relative } else { 0.0 },
            pass,
        });
    }
    Ok(ValidationReport::new(checks))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{analyze_corpus, CorpusSampler, GenerationSpec};
    use crate::trace::reference::{reference_trace, ReferenceTraceParams};
    use crate::trace::{generate_trace, TraceEntry, TraceGenSpec};

    fn seed_docs() -> Vec<Document> {
        let mut docs = Vec::new();
        for i in 0..60 {
            let n = 3 + i % 5;
            docs.push(Document::new("sports", (0..n).map(|j| ["ball", "goal", "team", "win"][(i + j) % 4])));
            if i % 2 == 0 {
                docs.push(Document::new("tech", (0..n + 2).map(|j| ["code", "chip", "data"][(i * j) % 3])));
            }
        }
        docs
    }

    #[test]
    fn shuffled_seed_passes_with_zero_kl() {
        let docs = seed_docs();
        let seed = analyze_corpus(&docs).unwrap();
        let mut shuffled = docs.clone();
        shuffled.reverse();
        let report = validate_corpus(&seed, shuffled.into_iter().map(Ok), &CorpusThresholds::default()).unwrap();
        assert!(report.pass, "{report}");
        for c in report.checks.iter().filter(|c| c.name.ends_with("word_kl") || c.name.ends_with("length_ks")) {
            assert_eq!(c.statistic, 0.0);
        }
    }

    #[test]
    fn self_generated_corpus_passes() {
        let seed = analyze_corpus(seed_docs()).unwrap();
        let sampler = CorpusSampler::new(&seed).unwrap();
        let docs = sampler.documents(GenerationSpec::docs(20_000, 5)).unwrap().map(Ok);
        let report = validate_corpus(&seed, docs, &CorpusThresholds::default()).unwrap();
        assert!(report.pass, "{report}");
    }

    #[test]
    fn dropped_class_fails() {
        let docs = seed_docs();
        let seed = analyze_corpus(&docs).unwrap();
        let only_sports = docs.into_iter().filter(|d| d.label == "sports").map(Ok);
        let report = validate_corpus(&seed, only_sports, &CorpusThresholds::default()).unwrap();
        assert!(!report.pass);
        let failed: Vec<&str> = report.failures().map(|c| c.name.as_str()).collect();
        assert!(failed.contains(&"class[tech].present"), "{failed:?}");
        assert!(failed.contains(&"class_distribution.chi2_p"), "{failed:?}");
    }

    #[test]
    fn unknown_synthetic_class_is_hard_failure() {
        let seed = analyze_corpus(seed_docs()).unwrap();
        let mut docs = seed_docs();
        docs.push(Document::new("weather", ["rain"]));
        let report = validate_corpus(&seed, docs.into_iter().map(Ok), &CorpusThresholds::default()).unwrap();
        assert!(!report.pass);
        assert!(report.failures().any(|c| c.name == "class[weather].in_seed"));
    }

    #[test]
    fn report_is_pure_and_serializes() {
        let seed = analyze_corpus(seed_docs()).unwrap();
        let run = || validate_corpus(&seed, seed_docs().into_iter().map(Ok), &CorpusThresholds::default()).unwrap();
        let (a, b) = (run(), run());
        assert_eq!(a, b);
        let mut json = Vec::new();
        a.write_json(&mut json).unwrap();
        let back: ValidationReport = serde_json::from_slice(&json).unwrap();
        assert_eq!(back, a);
        assert!(a.to_string().ends_with("overall: PASS"));
    }

    fn reference() -> QueryTrace {
        reference_trace(&ReferenceTraceParams {
            section_rates: vec![50.0, 80.0],
            section_len_ms: 60_000,
            queries: 6_000,
            ..Default::default()
        })
        .unwrap()
    }

    #[test]
    fn identical_trace_passes() {
        let t = reference();
        let model = analyze_trace(&t, 60_000, 5).unwrap();
        let report = validate_trace(&model, &t, &TraceThresholds::default()).unwrap();
        assert!(report.pass, "{report}");
        assert!(report.checks.iter().all(|c| c.statistic == 0.0), "{report}");
    }

    #[test]
    fn regenerated_trace_passes() {
        let t = reference();
        let model = analyze_trace(&t, 60_000, 5).unwrap();
        let duration = 10 * 60_000;
        let synth = generate_trace(&model, &TraceGenSpec::duration(duration, 3)).unwrap();
        let th = TraceThresholds { duration_ms: Some(duration), ..Default::default() };
        let report = validate_trace(&model, &synth, &th).unwrap();
        assert!(report.pass, "{report}");
    }

    #[test]
    fn corrupted_locality_fails() {
        let t = reference();
        let model = analyze_trace(&t, 60_000, 5).unwrap();
        // Same timing, every query distinct.
        let entries = t
            .entries()
            .iter()
            .enumerate()
            .map(|(i, e)| TraceEntry { timestamp_ms: e.timestamp_ms, terms: vec![format!("q{i}")] })
            .collect();
        let report = validate_trace(&model, &QueryTrace::new(entries).unwrap(), &TraceThresholds::default()).unwrap();
        assert!(!report.pass);
        assert!(report.failures().any(|c| c.name == "reuse_distance_ks"));
    }

    #[test]
    fn short_trace_is_an_error() {
        let t = reference();
        let model = analyze_trace(&t, 60_000, 5).unwrap();
        let first: Vec<TraceEntry> = t.entries().iter().take(100).cloned().collect();
        assert!(matches!(
            validate_trace(&model, &QueryTrace::new(first).unwrap(), &TraceThresholds::default()),
            Err(Error::TraceTooShort { covered: 1, required: 2 })
        ));
    }
}
