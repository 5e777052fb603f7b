//! Distribution comparison and fidelity validation.

mod gamma;
mod validate;

use std::collections::BTreeMap;

pub use gamma::{chi_square_sf, gamma_p, gamma_q, ln_gamma};
pub use validate::{validate_corpus, validate_corpus_model, validate_trace, Check, CorpusThresholds, TraceThresholds, ValidationReport};

use crate::error::{Error, Result};

/// Additive smoothing applied to `q` when it lacks support somewhere `p`
/// has mass.
pub const KL_SMOOTHING: f64 = 1e-9;

/// `D(p || q) = Σ p(x) ln(p(x) / q(x))` in nats.
///
/// `p` must sum to 1 within 1e-6. If `q` is zero or missing anywhere `p` is
/// positive, `q` is smoothed by adding `KL_SMOOTHING` to every outcome of
/// the joint support and renormalizing; otherwise `q` is used as given.
pub fn kl_divergence<K: Ord>(p: &BTreeMap<K, f64>, q: &BTreeMap<K, f64>) -> Result<f64> {
    check_probabilities(p, "p")?;
    if q.values().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::Distribution("q has negative or non-finite entries".into()));
    }
    let needs_smoothing = p
        .iter()
        .any(|(k, &pk)| pk > 0.0 && !matches!(q.get(k), Some(&qk) if qk > 0.0));
    let (shift, norm) = if needs_smoothing {
        let support = q.len() + p.keys().filter(|k| !q.contains_key(*k)).count();
        (KL_SMOOTHING, q.values().sum::<f64>() + KL_SMOOTHING * support as f64)
    } else {
        (0.0, 1.0)
    };
    let mut d = 0.0;
    for (k, &pk) in p {
        if pk > 0.0 {
            let qk = (q.get(k).copied().unwrap_or(0.0) + shift) / norm;
            d += pk * (pk / qk).ln();
        }
    }
    Ok(d.max(0.0))
}

fn check_probabilities<K>(p: &BTreeMap<K, f64>, name: &str) -> Result<()> {
    if p.values().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::Distribution(format!("{name} has negative or non-finite entries")));
    }
    let sum: f64 = p.values().sum();
    if (sum - 1.0).abs() > 1e-6 {
        return Err(Error::Distribution(format!("{name} is not normalized (sums to {sum})")));
    }
    Ok(())
}

/// Normalizes counts into a probability map.
pub fn normalize<K: Ord + Clone>(counts: &BTreeMap<K, u64>) -> BTreeMap<K, f64> {
    let total = counts.values().sum::<u64>() as f64;
    counts.iter().map(|(k, &n)| (k.clone(), n as f64 / total)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: u64,
    pub p_value: f64,
    /// Cells kept after pooling sparse ones.
    pub cells: usize,
}

/// Pearson goodness-of-fit of `observed` counts (total `n`) against the
/// `expected` probabilities.
///
/// Cells with expected count below 1 are pooled into one cell; if that
/// pooled cell still expects fewer than one observation it is merged into
/// the retained cell with the smallest expectation. Observed outcomes
/// absent from `expected` count toward the pooled cell.
pub fn chi_square_test<K: Ord>(observed: &BTreeMap<K, u64>, expected: &BTreeMap<K, f64>, n: u64) -> Result<ChiSquare> {
    if n == 0 {
        return Err(Error::InvalidArgument("chi-square test needs n >= 1".into()));
    }
    check_probabilities(expected, "expected")?;
    let nf = n as f64;
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let (mut pooled_o, mut pooled_e) = (0.0, 0.0);
    for (k, &pk) in expected {
        let o = observed.get(k).copied().unwrap_or(0) as f64;
        let e = pk * nf;
        if e >= 1.0 {
            cells.push((o, e));
        } else {
            pooled_o += o;
            pooled_e += e;
        }
    }
    pooled_o += observed
        .iter()
        .filter(|(k, _)| !expected.contains_key(*k))
        .map(|(_, &o)| o as f64)
        .sum::<f64>();
    if pooled_e >= 1.0 {
        cells.push((pooled_o, pooled_e));
    } else if pooled_o > 0.0 || pooled_e > 0.0 {
        match cells
            .iter_mut()
            .min_by(|a, b| a.1.partial_cmp(&b.1).expect("finite"))
        {
            Some(cell) => {
                cell.0 += pooled_o;
                cell.1 += pooled_e;
            }
            None => return Err(Error::Distribution("all cells pooled away".into())),
        }
    }
    if cells.is_empty() {
        return Err(Error::Distribution("all cells pooled away".into()));
    }
    let statistic: f64 = cells.iter().map(|&(o, e)| (o - e) * (o - e) / e).sum();
    let dof = cells.len() as u64 - 1;
    let p_value = if dof == 0 { 1.0 } else { chi_square_sf(statistic, dof as f64) };
    Ok(ChiSquare { statistic, dof, p_value, cells: cells.len() })
}

/// Step-function CDF `(x, F(x))` from counts over an ordered support.
pub fn cdf_from_counts<K: Ord + Clone>(counts: &BTreeMap<K, u64>) -> Vec<(K, f64)> {
    let total = counts.values().sum::<u64>() as f64;
    let mut acc = 0u64;
    let mut cdf: Vec<(K, f64)> = counts
        .iter()
        .map(|(k, &n)| {
            acc += n;
            (k.clone(), acc as f64 / total)
        })
        .collect();
    if let Some(last) = cdf.last_mut() {
        last.1 = 1.0;
    }
    cdf
}

/// Largest absolute difference between two step-function CDFs, each given
/// as `(x, F(x))` pairs in increasing `x`, evaluated over the merged
/// support.
pub fn ks_statistic<K: Ord>(a: &[(K, f64)], b: &[(K, f64)]) -> Result<f64> {
    check_cdf(a, "a")?;
    check_cdf(b, "b")?;
    let (mut i, mut j) = (0, 0);
    let (mut fa, mut fb) = (0.0f64, 0.0f64);
    let mut sup = 0.0f64;
    while i < a.len() || j < b.len() {
        let order = match (a.get(i), b.get(j)) {
            (Some(x), Some(y)) => x.0.cmp(&y.0),
            (Some(_), None) => std::cmp::Ordering::Less,
            (None, _) => std::cmp::Ordering::Greater,
        };
        if order.is_le() {
            fa = a[i].1;
            i += 1;
        }
        if order.is_ge() {
            fb = b[j].1;
            j += 1;
        }
        sup = sup.max((fa - fb).abs());
    }
    Ok(sup)
}

fn check_cdf<K: Ord>(cdf: &[(K, f64)], name: &str) -> Result<()> {
    let last = cdf
        .last()
        .ok_or_else(|| Error::Distribution(format!("CDF {name} has empty support")))?;
    if (last.1 - 1.0).abs() > 1e-6 {
        return Err(Error::Distribution(format!("CDF {name} ends at {} rather than 1", last.1)));
    }
    let mut prev: Option<&(K, f64)> = None;
    for point in cdf {
        if !(0.0..=1.0 + 1e-6).contains(&point.1) {
            return Err(Error::Distribution(format!("CDF {name} leaves [0, 1]")));
        }
        if let Some(p) = prev {
            if point.0 <= p.0 || point.1 < p.1 {
                return Err(Error::Distribution(format!("CDF {name} is not increasing in x and nondecreasing in F")));
            }
        }
        prev = Some(point);
    }
    Ok(())
}
