use std::collections::{BTreeMap, HashMap};
use std::path::Path;
use std::time::Instant;

use super::{for_each_record, is_test_record, label_string, tokens};
use crate::error::{Error, Result};
use crate::rate::{Summary, Workload, WorkloadResult};

/// Accumulates class and word counts for a multinomial Naive Bayes model.
#[derive(Debug, Default)]
pub struct NaiveBayesTrainer {
    classes: BTreeMap<String, usize>,
    class_docs: Vec<u64>,
    /// Per class, counts indexed by word id.
    word_counts: Vec<Vec<u64>>,
    vocab: HashMap<Box<[u8]>, u32>,
}

impl NaiveBayesTrainer {
    pub fn add<'a>(&mut self, label: &[u8], tokens: impl IntoIterator<Item = &'a [u8]>) {
        let label = label_string(label);
        let next = self.classes.len();
        let class = *self.classes.entry(label).or_insert(next);
        if class == self.class_docs.len() {
            self.class_docs.push(0);
            self.word_counts.push(Vec::new());
        }
        self.class_docs[class] += 1;
        for token in tokens {
            let id = match self.vocab.get(token) {
                Some(&id) => id,
                None => {
                    let id = self.vocab.len() as u32;
                    self.vocab.insert(token.into(), id);
                    id
                }
            } as usize;
            let counts = &mut self.word_counts[class];
            if counts.len() <= id {
                counts.resize(id + 1, 0);
            }
            counts[id] += 1;
        }
    }

    /// Builds log-probabilities with add-one smoothing over the training
    /// vocabulary.
    pub fn finish(self) -> Result<NaiveBayes> {
        match self.classes.len() {
            0 => return Err(Error::NoTrainingData),
            1 => return Err(Error::SingleClass(self.classes.into_keys().next().expect("one class"))),
            _ => {}
        }
        let k = self.classes.len();
        let v = self.vocab.len();
        let total_docs: u64 = self.class_docs.iter().sum();
        // Order classes by label so that ties go to the smaller label.
        let labels: Vec<String> = self.classes.keys().cloned().collect();
        let order: Vec<usize> = self.classes.values().copied().collect();
        let mut log_prior = Vec::with_capacity(k);
        let mut log_likelihood = vec![0.0; v * k];
        for (slot, &class) in order.iter().enumerate() {
            log_prior.push((self.class_docs[class] as f64 / total_docs as f64).ln());
            let counts = &self.word_counts[class];
            let total_words: u64 = counts.iter().sum();
            let denom = ((total_words + v as u64) as f64).ln();
            for word in 0..v {
                let n = counts.get(word).copied().unwrap_or(0);
                log_likelihood[word * k + slot] = ((n + 1) as f64).ln() - denom;
            }
        }
        Ok(NaiveBayes { labels, log_prior, log_likelihood, vocab: self.vocab })
    }
}

#[derive(Debug)]
pub struct NaiveBayes {
    labels: Vec<String>,
    log_prior: Vec<f64>,
    /// Row-major `[word][class]`.
    log_likelihood: Vec<f64>,
    vocab: HashMap<Box<[u8]>, u32>,
}

impl NaiveBayes {
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Log prior plus summed log likelihoods per class, in label order.
    /// Words outside the training vocabulary contribute nothing.
    pub fn scores<'a>(&self, tokens: impl IntoIterator<Item = &'a [u8]>) -> Vec<f64> {
        let k = self.labels.len();
        let mut scores = self.log_prior.clone();
        for token in tokens {
            if let Some(&id) = self.vocab.get(token) {
                let row = &self.log_likelihood[id as usize * k..][..k];
                for (s, l) in scores.iter_mut().zip(row) {
                    *s += l;
                }
            }
        }
        scores
    }

    /// Highest-scoring label; ties go to the lexicographically smaller one.
    pub fn predict<'a>(&self, tokens: impl IntoIterator<Item = &'a [u8]>) -> &str {
        let scores = self.scores(tokens);
        let mut best = 0;
        for (i, &s) in scores.iter().enumerate().skip(1) {
            if s > scores[best] {
                best = i;
            }
        }
        &self.labels[best]
    }
}

/// Trains on the training split of a labeled file and reports accuracy on
/// the test split. The file is read twice; both passes are timed.
pub fn run_naive_bayes(input: &Path) -> Result<WorkloadResult> {
    let start = Instant::now();
    let mut trainer = NaiveBayesTrainer::default();
    let bytes = for_each_record(input, |i, label, body| {
        if !is_test_record(i) {
            trainer.add(label, tokens(body));
        }
        Ok(())
    })?;
    let model = trainer.finish()?;
    let (mut correct, mut tested) = (0u64, 0u64);
    for_each_record(input, |i, label, body| {
        if is_test_record(i) {
            tested += 1;
            if model.predict(tokens(body)).as_bytes() == label {
                correct += 1;
            }
        }
        Ok(())
    })?;
    let elapsed = start.elapsed().as_secs_f64();
    Ok(WorkloadResult::new(Workload::NaiveBayes, bytes, elapsed, Summary::Accuracy { correct, tested }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn train(docs: &[(&str, &str)]) -> Result<NaiveBayes> {
        let mut t = NaiveBayesTrainer::default();
        for (label, body) in docs {
            t.add(label.as_bytes(), tokens(body.as_bytes()));
        }
        t.finish()
    }

    fn words(s: &str) -> impl Iterator<Item = &[u8]> {
        tokens(s.as_bytes())
    }

    #[test]
    fn separable_example() {
        let m = train(&[("A", "x"), ("B", "y")]).unwrap();
        assert_eq!(m.predict(words("x")), "A");
        assert_eq!(m.predict(words("y")), "B");
    }

    #[test]
    fn unseen_words_fall_back_to_prior() {
        let m = train(&[("A", "x"), ("B", "y"), ("B", "y y")]).unwrap();
        assert_eq!(m.predict(words("zzz qqq")), "B");
        let s = m.scores(words("zzz"));
        assert_eq!(s, m.log_prior);
    }

    #[test]
    fn ties_go_to_smaller_label() {
        let m = train(&[("B", "x"), ("A", "x")]).unwrap();
        assert_eq!(m.predict(words("x")), "A");
        assert_eq!(m.labels(), ["A", "B"]);
    }

    #[test]
    fn hand_computed_likelihoods() {
        // Vocabulary {x, y}; class A has words x x y, class B has y.
        let m = train(&[("A", "x x y"), ("B", "y")]).unwrap();
        let s = m.scores(words("x"));
        assert!((s[0] - (0.5f64.ln() + (3.0f64 / 5.0).ln())).abs() < 1e-12);
        assert!((s[1] - (0.5f64.ln() + (1.0f64 / 3.0).ln())).abs() < 1e-12);
    }

    #[test]
    fn single_class_rejected() {
        assert!(matches!(train(&[("A", "x"), ("A", "y")]), Err(Error::SingleClass(l)) if l == "A"));
        assert!(matches!(train(&[]), Err(Error::NoTrainingData)));
    }

    fn corpus() -> impl Strategy<Value = Vec<(u8, Vec<u8>)>> {
        proptest::collection::vec((0u8..3, proptest::collection::vec(0u8..6, 1..6)), 2..12)
    }

    proptest! {
        #[test]
        fn training_order_does_not_change_scores(docs in corpus(), query in proptest::collection::vec(0u8..6, 1..6)) {
            let labels: Vec<String> = docs.iter().map(|(c, _)| format!("c{c}")).collect();
            let bodies: Vec<Vec<Vec<u8>>> = docs.iter().map(|(_, ws)| ws.iter().map(|w| vec![b'a' + w]).collect()).collect();
            let build = |order: &mut dyn Iterator<Item = usize>| {
                let mut t = NaiveBayesTrainer::default();
                for i in order {
                    t.add(labels[i].as_bytes(), bodies[i].iter().map(Vec::as_slice));
                }
                t.finish()
            };
            let (Ok(fwd), Ok(rev)) = (build(&mut (0..docs.len())), build(&mut (0..docs.len()).rev())) else { return Ok(()) };
            let q: Vec<Vec<u8>> = query.iter().map(|w| vec![b'a' + w]).collect();
            let (a, b) = (fwd.scores(q.iter().map(Vec::as_slice)), rev.scores(q.iter().map(Vec::as_slice)));
            prop_assert_eq!(a.len(), b.len());
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x - y).abs() < 1e-9);
            }
            prop_assert_eq!(fwd.predict(q.iter().map(Vec::as_slice)), rev.predict(q.iter().map(Vec::as_slice)));
        }
    }
}
