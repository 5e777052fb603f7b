use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use seedgen_core::corpus::{analyze_corpus, analyze_corpus_reader, generate_corpus, CorpusModel, GenerationSpec, OutputOptions};
use seedgen_core::Document;
use seedgen_workloads::classify::{run_naive_bayes, run_svm, SvmParams};
use seedgen_workloads::grep::run_grep;
use seedgen_workloads::sort::{run_sort, SortOptions};
use seedgen_workloads::wordcount::run_wordcount;
use seedgen_workloads::Summary;

/// Seed with two classes that share no words: `ham` uses `a000..a299`,
/// `spam` uses `b000..b299`, with a skewed word choice and lengths 3..30.
fn disjoint_model() -> CorpusModel {
    let doc = |label: &str, prefix: char, j: usize| {
        let len = 3 + j % 27;
        Document::new(label, (0..len).map(|k| format!("{prefix}{:03}", (j * 31 + k * k) % 300 * ((j + k) % 7 + 1) / 7)))
    };
    let docs = (0..540).map(|j| doc("ham", 'a', j)).chain((0..270).map(|j| doc("spam", 'b', j)));
    analyze_corpus(docs).unwrap()
}

fn generate(model: &CorpusModel, path: &Path, spec: GenerationSpec) {
    let mut out = BufWriter::new(File::create(path).unwrap());
    generate_corpus(model, &spec, OutputOptions::default(), &mut out).unwrap();
    out.flush().unwrap();
}

fn accuracy(summary: &Summary) -> f64 {
    match summary {
        Summary::Accuracy { correct, tested } => *correct as f64 / *tested as f64,
        other => panic!("unexpected summary {other:?}"),
    }
}

#[test]
fn classifiers_separate_disjoint_vocabularies() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("disjoint.txt");
    // Every fifth record is held out, so 5 * 10^4 records give 10^4 test documents.
    generate(&disjoint_model(), &path, GenerationSpec::docs(50_000, 17));

    let nb = run_naive_bayes(&path).unwrap();
    assert!(matches!(nb.summary, Summary::Accuracy { tested: 10_000, .. }), "{}", nb.summary);
    assert!(accuracy(&nb.summary) >= 0.99, "{}", nb.summary);

    let svm = run_svm(&path, &SvmParams::default()).unwrap();
    assert!(accuracy(&svm.summary) >= 0.95, "{}", svm.summary);
    let again = run_svm(&path, &SvmParams::default()).unwrap();
    assert_eq!(svm.summary, again.summary);
}

#[test]
fn wordcount_agrees_with_corpus_analysis() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.txt");
    generate(&disjoint_model(), &path, GenerationSpec::docs(5_000, 3));
    let model = analyze_corpus_reader(BufReader::new(File::open(&path).unwrap())).unwrap();
    let words: u64 = model.classes().values().map(|c| c.total_words).sum();
    let result = run_wordcount(&path, 5).unwrap();
    match result.summary {
        // Labels are whitespace tokens too: one per document.
        Summary::TopWords { total, .. } => assert_eq!(total, words + model.total_docs()),
        other => panic!("unexpected summary {other:?}"),
    }
}

#[test]
fn grep_and_sort_match_naive_oracles_on_generated_text() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.txt");
    generate(&disjoint_model(), &path, GenerationSpec::bytes(2 << 20, 9));
    let text = std::fs::read_to_string(&path).unwrap();

    for pattern in ["a001", "b0", "\tham", "zzz"] {
        let expected = text.lines().filter(|l| l.contains(pattern)).count() as u64;
        assert_eq!(run_grep(&path, pattern).unwrap().summary, Summary::Matches(expected), "{pattern}");
    }

    let sorted = dir.path().join("sorted.txt");
    let result = run_sort(&path, &sorted, &SortOptions::with_budget(256 << 10)).unwrap();
    let mut oracle: Vec<&str> = text.lines().collect();
    oracle.sort_unstable();
    let expected: String = oracle.iter().flat_map(|l| [*l, "\n"]).collect();
    assert_eq!(std::fs::read_to_string(&sorted).unwrap(), expected);
    assert!(matches!(result.summary, Summary::Sorted { lines, .. } if lines == oracle.len() as u64));
}
