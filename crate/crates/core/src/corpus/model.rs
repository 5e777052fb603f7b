use std::borrow::Borrow;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::{BufRead, Read, Write};

use serde::{Deserialize, Serialize};

use crate::document::{Document, DocumentReader};
use crate::error::{Error, Result};
use crate::persist::{self, int_keys, SCHEMA_VERSION};

/// Counts for one class: documents, words and document lengths (in tokens).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ClassStats {
    pub doc_count: u64,
    pub total_words: u64,
    pub word_counts: BTreeMap<String, u64>,
    pub length_histogram: BTreeMap<u64, u64>,
}

/// Class, word and length statistics of a labeled corpus, kept as exact
/// counts. Probabilities are obtained by normalizing on demand.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CorpusModel {
    total_docs: u64,
    classes: BTreeMap<String, ClassStats>,
}

impl CorpusModel {
    /// Builds a model from raw counts, checking every count invariant.
    pub fn from_parts(total_docs: u64, classes: BTreeMap<String, ClassStats>) -> Result<Self> {
        let model = CorpusModel { total_docs, classes };
        model.check()?;
        Ok(model)
    }

    pub fn total_docs(&self) -> u64 {
        self.total_docs
    }

    pub fn classes(&self) -> &BTreeMap<String, ClassStats> {
        &self.classes
    }

    pub fn class(&self, label: &str) -> Result<&ClassStats> {
        self.classes
            .get(label)
            .ok_or_else(|| Error::UnknownClass(label.to_owned()))
    }

    pub fn vocabulary(&self) -> BTreeSet<&str> {
        self.classes
            .values()
            .flat_map(|c| c.word_counts.keys().map(String::as_str))
            .collect()
    }

    /// Verifies the count invariants.
    pub fn check(&self) -> Result<()> {
        let invalid = |msg: String| Err(Error::InvalidModel(msg));
        if self.classes.is_empty() {
            return invalid("model has no classes".into());
        }
        let mut docs = 0u64;
        for (label, class) in &self.classes {
            if label.is_empty() || label.contains(['\t', '\n', '\r']) {
                return invalid(format!("invalid class label {label:?}"));
            }
            if class.doc_count == 0 {
                return invalid(format!("class {label:?} has no documents"));
            }
            let words: u64 = class.word_counts.values().sum();
            if words != class.total_words {
                return invalid(format!(
                    "class {label:?}: word counts sum to {words}, total_words is {}",
                    class.total_words
                ));
            }
            let lengths: u64 = class.length_histogram.values().sum();
            if lengths != class.doc_count {
                return invalid(format!(
                    "class {label:?}: length histogram sums to {lengths}, doc_count is {}",
                    class.doc_count
                ));
            }
            let weighted: u64 = class.length_histogram.iter().map(|(len, n)| len * n).sum();
            if weighted != class.total_words {
                return invalid(format!(
                    "class {label:?}: lengths account for {weighted} words, total_words is {}",
                    class.total_words
                ));
            }
            if class.length_histogram.contains_key(&0) {
                return invalid(format!("class {label:?} has zero-length documents"));
            }
            docs += class.doc_count;
        }
        if docs != self.total_docs {
            return invalid(format!("class doc counts sum to {docs}, total_docs is {}", self.total_docs));
        }
        Ok(())
    }

    /// P(c) for every class, in label order.
    pub fn class_distribution(&self) -> BTreeMap<String, f64> {
        let total = self.total_docs as f64;
        self.classes
            .iter()
            .map(|(label, c)| (label.clone(), c.doc_count as f64 / total))
            .collect()
    }

    /// P(w | c).
    pub fn word_distribution(&self, label: &str) -> Result<BTreeMap<String, f64>> {
        let class = self.class(label)?;
        let total = class.total_words as f64;
        Ok(class
            .word_counts
            .iter()
            .map(|(w, &n)| (w.clone(), n as f64 / total))
            .collect())
    }

    /// P(len | c), lengths in tokens.
    pub fn length_distribution(&self, label: &str) -> Result<BTreeMap<u64, f64>> {
        let class = self.class(label)?;
        let total = class.doc_count as f64;
        Ok(class
            .length_histogram
            .iter()
            .map(|(&len, &n)| (len, n as f64 / total))
            .collect())
    }

    /// Field-wise sum of two models.
    pub fn merge(&mut self, other: &CorpusModel) {
        self.total_docs += other.total_docs;
        for (label, theirs) in &other.classes {
            let ours = self.classes.entry(label.clone()).or_default();
            ours.doc_count += theirs.doc_count;
            ours.total_words += theirs.total_words;
            for (w, n) in &theirs.word_counts {
                *ours.word_counts.entry(w.clone()).or_default() += n;
            }
            for (len, n) in &theirs.length_histogram {
                *ours.length_histogram.entry(*len).or_default() += n;
            }
        }
    }

    pub fn save<W: Write>(&self, out: W) -> Result<()> {
        let file = ModelFile {
            classes: self
                .classes
                .iter()
                .map(|(label, c)| ClassRecord {
                    doc_count: c.doc_count,
                    label: label.clone(),
                    length_histogram: c.length_histogram.clone(),
                    total_words: c.total_words,
                    word_counts: c.word_counts.clone(),
                })
                .collect(),
            schema_version: SCHEMA_VERSION,
            total_docs: self.total_docs,
        };
        persist::save(&file, out)
    }

    pub fn load<R: Read>(input: R) -> Result<Self> {
        let file: ModelFile = persist::load(input)?;
        let mut classes = BTreeMap::new();
        for record in file.classes {
            if classes.contains_key(&record.label) {
                return Err(Error::DuplicateClass(record.label));
            }
            classes.insert(
                record.label,
                ClassStats {
                    doc_count: record.doc_count,
                    total_words: record.total_words,
                    word_counts: record.word_counts,
                    length_histogram: record.length_histogram,
                },
            );
        }
        CorpusModel::from_parts(file.total_docs, classes)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    classes: Vec<ClassRecord>,
    schema_version: u64,
    total_docs: u64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ClassRecord {
    doc_count: u64,
    label: String,
    #[serde(with = "int_keys")]
    length_histogram: BTreeMap<u64, u64>,
    total_words: u64,
    word_counts: BTreeMap<String, u64>,
}

/// Incremental single-pass counter behind [`analyze_corpus`].
///
/// Partial analyzers over disjoint parts of a corpus can be combined with
/// [`CorpusAnalyzer::merge`]; the result does not depend on merge order.
#[derive(Debug, Default)]
pub struct CorpusAnalyzer {
    docs: u64,
    classes: HashMap<String, PartialClass>,
}

#[derive(Debug, Default)]
struct PartialClass {
    doc_count: u64,
    total_words: u64,
    word_counts: HashMap<String, u64>,
    length_histogram: HashMap<u64, u64>,
}

impl CorpusAnalyzer {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds one document. `index` is reported if the document is malformed.
    pub fn add(&mut self, doc: &Document, index: usize) -> Result<()> {
        doc.check()
            .map_err(|reason| Error::MalformedDocument { index, reason })?;
        let class = match self.classes.get_mut(doc.label.as_str()) {
            Some(c) => c,
            None => self.classes.entry(doc.label.clone()).or_default(),
        };
        class.doc_count += 1;
        class.total_words += doc.tokens.len() as u64;
        *class.length_histogram.entry(doc.tokens.len() as u64).or_default() += 1;
        for token in &doc.tokens {
            match class.word_counts.get_mut(token.as_str()) {
                Some(n) => *n += 1,
                None => {
                    class.word_counts.insert(token.clone(), 1);
                }
            }
        }
        self.docs += 1;
        Ok(())
    }

    pub fn merge(&mut self, other: CorpusAnalyzer) {
        self.docs += other.docs;
        for (label, theirs) in other.classes {
            let ours = self.classes.entry(label).or_default();
            ours.doc_count += theirs.doc_count;
            ours.total_words += theirs.total_words;
            for (w, n) in theirs.word_counts {
                *ours.word_counts.entry(w).or_default() += n;
            }
            for (len, n) in theirs.length_histogram {
                *ours.length_histogram.entry(len).or_default() += n;
            }
        }
    }

    pub fn finish(self) -> Result<CorpusModel> {
        if self.docs == 0 {
            return Err(Error::EmptyCorpus);
        }
        let classes = self
            .classes
            .into_iter()
            .map(|(label, c)| {
                let stats = ClassStats {
                    doc_count: c.doc_count,
                    total_words: c.total_words,
                    word_counts: c.word_counts.into_iter().collect(),
                    length_histogram: c.length_histogram.into_iter().collect(),
                };
                (label, stats)
            })
            .collect();
        CorpusModel::from_parts(self.docs, classes)
    }
}

/// Counts classes, words per class and document lengths per class in one
/// pass over `documents`.
pub fn analyze_corpus<I>(documents: I) -> Result<CorpusModel>
where
    I: IntoIterator,
    I::Item: Borrow<Document>,
{
    let mut analyzer = CorpusAnalyzer::new();
    for (index, doc) in documents.into_iter().enumerate() {
        analyzer.add(doc.borrow(), index)?;
    }
    analyzer.finish()
}

/// Like [`analyze_corpus`], reading `label<TAB>tokens` lines.
pub fn analyze_corpus_reader<R: BufRead>(reader: R) -> Result<CorpusModel> {
    let mut analyzer = CorpusAnalyzer::new();
    for (index, doc) in DocumentReader::new(reader).enumerate() {
        analyzer.add(&doc?, index)?;
    }
    analyzer.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(label: &str, tokens: &[&str]) -> Document {
        Document::new(label, tokens.iter().copied())
    }

    #[test]
    fn single_document_counts() {
        let m = analyze_corpus([doc("A", &["x", "x", "y"])]).unwrap();
        assert_eq!(m.total_docs(), 1);
        let a = m.class("A").unwrap();
        assert_eq!(a.doc_count, 1);
        assert_eq!(a.total_words, 3);
        assert_eq!(a.word_counts, BTreeMap::from([("x".into(), 2), ("y".into(), 1)]));
        assert_eq!(a.length_histogram, BTreeMap::from([(3, 1)]));
    }

    #[test]
    fn two_class_distributions() {
        let m = analyze_corpus([doc("A", &["x"]), doc("B", &["y", "y"])]).unwrap();
        let pc = m.class_distribution();
        assert_eq!(pc["A"], 0.5);
        assert_eq!(pc["B"], 0.5);
        assert_eq!(m.word_distribution("A").unwrap()["x"], 1.0);
        assert_eq!(m.word_distribution("B").unwrap()["y"], 1.0);
        assert_eq!(m.length_distribution("A").unwrap(), BTreeMap::from([(1, 1.0)]));
        assert_eq!(m.length_distribution("B").unwrap(), BTreeMap::from([(2, 1.0)]));
    }

    #[test]
    fn class_distribution_three_to_one() {
        let m = analyze_corpus([
            doc("A", &["x"]),
            doc("A", &["x"]),
            doc("A", &["x"]),
            doc("B", &["y"]),
        ])
        .unwrap();
        let pc = m.class_distribution();
        assert_eq!((pc["A"], pc["B"]), (0.75, 0.25));
    }

    #[test]
    fn word_and_length_distribution_values() {
        let m = analyze_corpus([doc("A", &["x", "x", "y"])]).unwrap();
        let pw = m.word_distribution("A").unwrap();
        assert!((pw["x"] - 2.0 / 3.0).abs() < 1e-15);
        assert!((pw["y"] - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(m.length_distribution("A").unwrap(), BTreeMap::from([(3, 1.0)]));
    }

    #[test]
    fn unknown_class_is_named() {
        let m = analyze_corpus([doc("A", &["x"])]).unwrap();
        let err = m.word_distribution("Z").unwrap_err();
        assert!(err.to_string().contains("\"Z\""));
        assert!(m.length_distribution("Z").is_err());
    }

    #[test]
    fn empty_stream_is_an_error() {
        let err = analyze_corpus(Vec::<Document>::new()).unwrap_err();
        assert_eq!(err.to_string(), "empty seed corpus");
    }

    #[test]
    fn malformed_document_names_index() {
        let docs = vec![doc("A", &["x"]), doc("A", &[])];
        match analyze_corpus(&docs).unwrap_err() {
            Error::MalformedDocument { index, .. } => assert_eq!(index, 1),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn reader_and_iterator_agree() {
        let text = "A\tx x y\nB\ty\nA\tz\n";
        let from_reader = analyze_corpus_reader(text.as_bytes()).unwrap();
        let from_docs = analyze_corpus([doc("A", &["x", "x", "y"]), doc("B", &["y"]), doc("A", &["z"])]).unwrap();
        assert_eq!(from_reader, from_docs);
    }

    #[test]
    fn from_parts_rejects_inconsistent_counts() {
        let mut classes = BTreeMap::new();
        classes.insert(
            "A".to_string(),
            ClassStats {
                doc_count: 1,
                total_words: 2,
                word_counts: BTreeMap::from([("x".into(), 1)]),
                length_histogram: BTreeMap::from([(2, 1)]),
            },
        );
        assert!(matches!(CorpusModel::from_parts(1, classes), Err(Error::InvalidModel(_))));
    }

    #[test]
    fn save_load_roundtrip_single_doc() {
        let m = analyze_corpus([doc("A", &["x", "x", "y"])]).unwrap();
        let mut buf = Vec::new();
        m.save(&mut buf).unwrap();
        let back = CorpusModel::load(buf.as_slice()).unwrap();
        assert_eq!(back, m);
        let mut again = Vec::new();
        back.save(&mut again).unwrap();
        assert_eq!(buf, again);
    }

    #[test]
    fn serialized_keys_are_sorted() {
        let lens: Vec<Document> = (1..=12).map(|n| Document::new("A", vec!["w"; n])).collect();
        let m = analyze_corpus(&lens).unwrap();
        let mut buf = Vec::new();
        m.save(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let pos = |s: &str| text.find(s).unwrap();
        assert!(pos("\"classes\"") < pos("\"schema_version\""));
        assert!(pos("\"schema_version\"") < pos("\"total_docs\""));
        assert!(pos("\"10\"") < pos("\"2\""));
    }

    #[test]
    fn load_empty_file_is_truncated() {
        assert!(matches!(CorpusModel::load(&b""[..]), Err(Error::Truncated)));
    }

    #[test]
    fn load_cut_file_is_truncated() {
        let m = analyze_corpus([doc("A", &["x"])]).unwrap();
        let mut buf = Vec::new();
        m.save(&mut buf).unwrap();
        buf.truncate(buf.len() / 2);
        assert!(matches!(CorpusModel::load(buf.as_slice()), Err(Error::Truncated)));
    }

    #[test]
    fn load_wrong_schema_version() {
        let text = r#"{"classes": [], "schema_version": 2, "total_docs": 0}"#;
        assert!(matches!(
            CorpusModel::load(text.as_bytes()),
            Err(Error::SchemaVersion { found: 2, expected: 1 })
        ));
    }

    #[test]
    fn load_duplicate_class() {
        let class = r#"{"doc_count": 1, "label": "A", "length_histogram": {"1": 1}, "total_words": 1, "word_counts": {"x": 1}}"#;
        let text = format!(r#"{{"classes": [{class}, {class}], "schema_version": 1, "total_docs": 2}}"#);
        assert!(matches!(
            CorpusModel::load(text.as_bytes()),
            Err(Error::DuplicateClass(label)) if label == "A"
        ));
    }
}
