use std::collections::BTreeMap;

use rand::SeedableRng;
use seedgen_core::rng::StreamRng;
use seedgen_core::stats::{kl_divergence, ks_statistic, validate_trace, TraceThresholds};
use seedgen_core::trace::reference::{reference_trace, ReferenceTraceParams};
use seedgen_core::trace::{
    analyze_trace, generate_trace, QuerySampler, QueryTrace, ReuseHistogram, TraceGenSpec, TraceModel,
};

const SECTION_MS: u64 = 60_000;

/// Drops the trailing partial section so that every modeled rate covers a
/// full section.
fn whole_sections(trace: QueryTrace) -> (QueryTrace, u64) {
    let end = trace.entries().last().unwrap().timestamp_ms / SECTION_MS * SECTION_MS;
    let kept = trace.entries().iter().filter(|e| e.timestamp_ms < end).cloned().collect();
    (QueryTrace::new(kept).unwrap(), end)
}

#[test]
fn ground_truth_roundtrip_from_ten_thousand_queries() {
    let params = ReferenceTraceParams { queries: 10_000, ..Default::default() };
    let (seed, end) = whole_sections(reference_trace(&params).unwrap());
    let model = analyze_trace(&seed, SECTION_MS, 5).unwrap();

    // The trimmed seed spans four sections; twelve times that is about 10^5 queries.
    let duration = end * 12;
    let spec = TraceGenSpec::duration(duration, 3);
    let synthetic = generate_trace(&model, &spec).unwrap();
    assert!((90_000..110_000).contains(&synthetic.len()), "{}", synthetic.len());

    let th = TraceThresholds { duration_ms: Some(duration), ..Default::default() };
    let report = validate_trace(&model, &synthetic, &th).unwrap();
    assert!(report.pass, "{report}");
}

#[test]
fn fixed_histogram_is_reproduced() {
    let counts: BTreeMap<u64, u64> = (0..300u64).map(|d| (d * 7, 10_000 / (d + 1))).collect();
    let cold = counts.values().sum::<u64>() / 4;
    let n = counts.values().sum::<u64>() + cold;
    let model = TraceModel::from_parts(
        (0..200).map(|i| (format!("w{i:03}"), 1000 - i as u64)),
        None,
        [(1, n / 2), (2, n - n / 2)].into_iter().collect(),
        ReuseHistogram { counts, cold },
        1000,
        vec![1000.0],
    )
    .unwrap();
    let trace = generate_trace(&model, &TraceGenSpec::queries(100_000, 11)).unwrap();
    let back = analyze_trace(&trace, 1000, 5).unwrap();
    let ks = ks_statistic(&model.reuse().cdf(), &back.reuse().cdf()).unwrap();
    assert!(ks <= 0.05, "ks = {ks}");
    assert!((back.cold_fraction() - model.cold_fraction()).abs() <= 0.02);
}

#[test]
fn new_query_terms_follow_term_frequencies() {
    let seed = reference_trace(&ReferenceTraceParams::default()).unwrap();
    let model = analyze_trace(&seed, SECTION_MS, 5).unwrap();
    let sampler = QuerySampler::new(&model).unwrap();
    let mut rng = StreamRng::seed_from_u64(5);
    let mut counts: BTreeMap<u32, f64> = BTreeMap::new();
    let mut draws = 0u64;
    while draws < 1_000_000 {
        for t in sampler.sample_new_query(&mut rng) {
            *counts.entry(t).or_default() += 1.0;
            draws += 1;
        }
    }
    let total = model.term_freq().iter().map(|(_, n)| *n).sum::<u64>() as f64;
    let expected: BTreeMap<u32, f64> =
        model.term_freq().iter().enumerate().map(|(i, (_, n))| (i as u32, *n as f64 / total)).collect();
    let observed: BTreeMap<u32, f64> = counts.into_iter().map(|(t, c)| (t, c / draws as f64)).collect();
    let kl = kl_divergence(&observed, &expected).unwrap();
    assert!(kl <= 0.01, "kl = {kl}");
}
