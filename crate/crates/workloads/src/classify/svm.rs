use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use rand::seq::SliceRandom;
use seedgen_core::rng::{purpose_rng, Purpose};
use xxhash_rust::xxh3::xxh3_64;

use super::{for_each_record, is_test_record, label_string, tokens};
use crate::error::{Error, Result};
use crate::rate::{Summary, Workload, WorkloadResult};

pub const HASH_BITS: u32 = 18;
const DIM: usize = 1 << HASH_BITS;
/// Index of the constant bias feature, after the hashed features.
const BIAS: u32 = DIM as u32;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvmParams {
    pub epochs: usize,
    pub lambda: f64,
    /// Seeds the per-epoch example order.
    pub seed: u64,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams { epochs: 5, lambda: 1e-4, seed: seedgen_core::rng::DEFAULT_SEED }
    }
}

/// Sparse examples stored back to back.
#[derive(Debug, Default)]
struct Examples {
    features: Vec<(u32, f32)>,
    offsets: Vec<usize>,
    labels: Vec<u32>,
}

impl Examples {
    fn push(&mut self, x: &[(u32, f32)], label: u32) {
        self.offsets.push(self.features.len());
        self.features.extend_from_slice(x);
        self.labels.push(label);
    }

    fn len(&self) -> usize {
        self.labels.len()
    }

    fn get(&self, i: usize) -> &[(u32, f32)] {
        let end = self.offsets.get(i + 1).copied().unwrap_or(self.features.len());
        &self.features[self.offsets[i]..end]
    }
}

/// Term-frequency vector with each token hashed to one of 2^18 slots and a
/// hash-derived sign, L2-normalized, plus a constant bias feature of 1.
pub fn featurize<'a>(tokens: impl IntoIterator<Item = &'a [u8]>, out: &mut Vec<(u32, f32)>) {
    out.clear();
    let mut raw: Vec<(u32, f32)> = tokens
        .into_iter()
        .map(|t| {
            let h = xxh3_64(t);
            let sign = if h >> 63 == 1 { -1.0 } else { 1.0 };
            ((h as usize & (DIM - 1)) as u32, sign)
        })
        .collect();
    raw.sort_unstable_by_key(|&(i, _)| i);
    for (i, v) in raw {
        match out.last_mut() {
            Some(last) if last.0 == i => last.1 += v,
            _ => out.push((i, v)),
        }
    }
    out.retain(|&(_, v)| v != 0.0);
    let norm = out.iter().map(|&(_, v)| (v as f64) * (v as f64)).sum::<f64>().sqrt();
    if norm > 0.0 {
        for (_, v) in out.iter_mut() {
            *v = (*v as f64 / norm) as f32;
        }
    }
    out.push((BIAS, 1.0));
}

fn dot(w: &[f64], x: &[(u32, f32)]) -> f64 {
    x.iter().map(|&(i, v)| w[i as usize] * v as f64).sum()
}

/// One binary Pegasos run: hinge loss, step size 1/(lambda t), examples
/// visited in a seeded shuffled order each epoch. Returns `w`.
///
/// With `w_t = v_t / t`, the update `w_t = (1 - 1/t) w_{t-1} + [viol] y x /
/// (lambda t)` becomes `v_t = v_{t-1} + [viol] y x / lambda`, which avoids
/// rescaling the weight vector at every step.
fn pegasos(data: &Examples, positive: u32, params: &SvmParams) -> Vec<f64> {
    let mut v = vec![0.0f64; DIM + 1];
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut rng = purpose_rng(params.seed, Purpose::Shuffle);
    let mut t = 0u64;
    for _ in 0..params.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            t += 1;
            let x = data.get(i);
            let y = if data.labels[i] == positive { 1.0 } else { -1.0 };
            if y * dot(&v, x) / (t as f64) < 1.0 {
                let step = y / params.lambda;
                for &(j, val) in x {
                    v[j as usize] += step * val as f64;
                }
            }
        }
    }
    let t = t.max(1) as f64;
    v.iter_mut().for_each(|w| *w /= t);
    v
}

/// Linear SVM. Two classes use one classifier with the smaller label as the
/// positive class; more classes use one-vs-rest with the largest decision
/// value winning (ties to the smaller label).
#[derive(Debug)]
pub struct Svm {
    labels: Vec<String>,
    weights: Vec<Vec<f64>>,
}

impl Svm {
    fn fit(data: &Examples, labels: Vec<String>, params: &SvmParams) -> Result<Self> {
        match labels.len() {
            0 => return Err(Error::NoTrainingData),
            1 => return Err(Error::SingleClass(labels.into_iter().next().expect("one label"))),
            _ => {}
        }
        if params.epochs == 0 || !(params.lambda.is_finite() && params.lambda > 0.0) {
            return Err(Error::InvalidArgument("SVM needs epochs >= 1 and lambda > 0".into()));
        }
        let models = if labels.len() == 2 { 1 } else { labels.len() };
        let weights = (0..models as u32).map(|c| pegasos(data, c, params)).collect();
        Ok(Svm { labels, weights })
    }

    /// Trains on `(label, tokens)` pairs.
    pub fn train<'a, I, T>(docs: I, params: &SvmParams) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a str, T)>,
        T: IntoIterator<Item = &'a [u8]>,
    {
        let mut builder = ExampleBuilder::default();
        for (label, toks) in docs {
            builder.add(label.as_bytes(), toks);
        }
        let (data, labels) = builder.finish();
        Svm::fit(&data, labels, params)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Decision values: one for two classes (positive favors the smaller
    /// label), otherwise one per class in label order.
    pub fn decision<'a>(&self, tokens: impl IntoIterator<Item = &'a [u8]>) -> Vec<f64> {
        let mut x = Vec::new();
        featurize(tokens, &mut x);
        self.weights.iter().map(|w| dot(w, &x)).collect()
    }

    fn predict_index(&self, decision: &[f64]) -> usize {
        if self.weights.len() == 1 {
            return if decision[0] >= 0.0 { 0 } else { 1 };
        }
        let mut best = 0;
        for (i, &d) in decision.iter().enumerate().skip(1) {
            if d > decision[best] {
                best = i;
            }
        }
        best
    }

    pub fn predict<'a>(&self, tokens: impl IntoIterator<Item = &'a [u8]>) -> &str {
        let d = self.decision(tokens);
        &self.labels[self.predict_index(&d)]
    }

    /// Mean hinge loss over `(label, tokens)` pairs, excluding the
    /// regularizer. Two-class models only.
    pub fn hinge_loss<'a, I, T>(&self, docs: I) -> f64
    where
        I: IntoIterator<Item = (&'a str, T)>,
        T: IntoIterator<Item = &'a [u8]>,
    {
        let (mut sum, mut n) = (0.0, 0usize);
        for (label, toks) in docs {
            let y = if label == self.labels[0] { 1.0 } else { -1.0 };
            sum += (1.0 - y * self.decision(toks)[0]).max(0.0);
            n += 1;
        }
        sum / n.max(1) as f64
    }
}

/// Collects featurized examples; label ids follow lexicographic label order.
#[derive(Default)]
struct ExampleBuilder {
    data: Examples,
    labels: BTreeMap<String, u32>,
    raw_labels: Vec<u32>,
    scratch: Vec<(u32, f32)>,
}

impl ExampleBuilder {
    fn add<'a>(&mut self, label: &[u8], toks: impl IntoIterator<Item = &'a [u8]>) {
        let next = self.labels.len() as u32;
        let id = *self.labels.entry(label_string(label)).or_insert(next);
        featurize(toks, &mut self.scratch);
        self.data.push(&self.scratch, id);
        self.raw_labels.push(id);
    }

    fn finish(mut self) -> (Examples, Vec<String>) {
        // Remap insertion-order ids to sorted-label ids.
        let mut remap = vec![0u32; self.labels.len()];
        for (rank, &id) in self.labels.values().enumerate() {
            remap[id as usize] = rank as u32;
        }
        for (l, raw) in self.data.labels.iter_mut().zip(&self.raw_labels) {
            *l = remap[*raw as usize];
        }
        (self.data, self.labels.into_keys().collect())
    }
}

/// Raw label and sparse feature vector of one held-out document.
type LabeledFeatures = (Vec<u8>, Vec<(u32, f32)>);

/// Trains on the training split of a labeled file and reports accuracy on
/// the test split. Training examples are held in memory as sparse hashed
/// vectors; the file is read once.
pub fn run_svm(input: &Path, params: &SvmParams) -> Result<WorkloadResult> {
    let start = Instant::now();
    let mut train = ExampleBuilder::default();
    let mut test: Vec<LabeledFeatures> = Vec::new();
    let bytes = for_each_record(input, |i, label, body| {
        if is_test_record(i) {
            let mut x = Vec::new();
            featurize(tokens(body), &mut x);
            test.push((label.to_vec(), x));
        } else {
            train.add(label, tokens(body));
        }
        Ok(())
    })?;
    let (data, labels) = train.finish();
    let svm = Svm::fit(&data, labels, params)?;
    let mut correct = 0u64;
    for (label, x) in &test {
        let d: Vec<f64> = svm.weights.iter().map(|w| dot(w, x)).collect();
        if svm.labels[svm.predict_index(&d)].as_bytes() == label.as_slice() {
            correct += 1;
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    let summary = Summary::Accuracy { correct, tested: test.len() as u64 };
    Ok(WorkloadResult::new(Workload::Svm, bytes, elapsed, summary))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn docs<'a>(pairs: &'a [(&'a str, &'a str)]) -> impl Iterator<Item = (&'a str, impl Iterator<Item = &'a [u8]>)> {
        pairs.iter().map(|(l, b)| (*l, tokens(b.as_bytes())))
    }

    #[test]
    fn featurize_normalizes_and_adds_bias() {
        let mut x = Vec::new();
        featurize(tokens(b"a a b"), &mut x);
        assert_eq!(x.last(), Some(&(BIAS, 1.0)));
        let norm: f64 = x[..x.len() - 1].iter().map(|&(_, v)| (v as f64).powi(2)).sum();
        assert!((norm - 1.0).abs() < 1e-6);
        assert!(x.windows(2).all(|w| w[0].0 < w[1].0));
    }

    #[test]
    fn separable_singletons_reach_zero_loss() {
        let pairs = [("A", "x"), ("B", "y")];
        let svm = Svm::train(docs(&pairs), &SvmParams::default()).unwrap();
        assert_eq!(svm.hinge_loss(docs(&pairs)), 0.0);
        assert_eq!(svm.predict(tokens(b"x")), "A");
        assert_eq!(svm.predict(tokens(b"y")), "B");
    }

    #[test]
    fn label_flip_negates_decisions() {
        let pairs = [("A", "x y"), ("B", "y z"), ("A", "x"), ("B", "z z w"), ("A", "w x")];
        let flipped: Vec<(&str, &str)> =
            pairs.iter().map(|&(l, b)| (if l == "A" { "B" } else { "A" }, b)).collect();
        let p = SvmParams::default();
        let a = Svm::train(docs(&pairs), &p).unwrap();
        let b = Svm::train(docs(&flipped), &p).unwrap();
        for (_, body) in pairs {
            let da = a.decision(tokens(body.as_bytes()))[0];
            let db = b.decision(tokens(body.as_bytes()))[0];
            assert_eq!(da, -db);
        }
    }

    #[test]
    fn one_vs_rest_for_three_classes() {
        let pairs = [("A", "a1 a2"), ("B", "b1 b2"), ("C", "c1 c2"), ("A", "a2 a3"), ("B", "b2 b3"), ("C", "c3")];
        let svm = Svm::train(docs(&pairs), &SvmParams::default()).unwrap();
        assert_eq!(svm.labels(), ["A", "B", "C"]);
        assert_eq!(svm.decision(tokens(b"a1")).len(), 3);
        for (label, body) in pairs {
            assert_eq!(svm.predict(tokens(body.as_bytes())), label);
        }
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let pairs = [("A", "x y"), ("B", "y z"), ("A", "x"), ("B", "z")];
        let p = SvmParams::default();
        let a = Svm::train(docs(&pairs), &p).unwrap();
        let b = Svm::train(docs(&pairs), &p).unwrap();
        assert_eq!(a.weights, b.weights);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(matches!(Svm::train(docs(&[("A", "x")]), &SvmParams::default()), Err(Error::SingleClass(_))));
        let bad = SvmParams { epochs: 0, ..Default::default() };
        assert!(Svm::train(docs(&[("A", "x"), ("B", "y")]), &bad).is_err());
    }
}
