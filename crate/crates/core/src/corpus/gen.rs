use std::io::Write;
use std::thread;

use rand::Rng;

use crate::corpus::model::CorpusModel;
use crate::document::Document;
use crate::error::{Error, Result};
use crate::rng::{chunk_rng, StreamRng};
use crate::sampling::Categorical;

pub const DEFAULT_CHUNK_SIZE: u64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    Docs(u64),
    /// Stop after the first document whose line brings the output to at
    /// least this many bytes.
    Bytes(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenerationSpec {
    pub target: Target,
    pub master_seed: u64,
    /// Documents per independently seeded chunk. Part of the output's
    /// identity: changing it changes the bytes.
    pub chunk_size: u64,
}

impl GenerationSpec {
    pub fn docs(n: u64, master_seed: u64) -> Self {
        GenerationSpec { target: Target::Docs(n), master_seed, chunk_size: DEFAULT_CHUNK_SIZE }
    }

    pub fn bytes(n: u64, master_seed: u64) -> Self {
        GenerationSpec { target: Target::Bytes(n), master_seed, chunk_size: DEFAULT_CHUNK_SIZE }
    }

    pub fn check(&self) -> Result<()> {
        let target = match self.target {
            Target::Docs(n) | Target::Bytes(n) => n,
        };
        if target == 0 {
            return Err(Error::InvalidArgument("generation target must be positive".into()));
        }
        if self.chunk_size == 0 {
            return Err(Error::InvalidArgument("chunk size must be at least 1".into()));
        }
        Ok(())
    }
}

/// How generated documents are serialized and how many worker threads
/// produce chunks. Neither affects which documents are generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OutputOptions {
    pub unlabeled: bool,
    pub threads: usize,
}

impl Default for OutputOptions {
    fn default() -> Self {
        OutputOptions { unlabeled: false, threads: 1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct GenerationSummary {
    pub docs_written: u64,
    pub bytes_written: u64,
}

struct ClassSampler {
    label: String,
    lengths: Categorical<u64>,
    words: Categorical<u32>,
}

/// Sampling tables materialized from a [`CorpusModel`].
///
/// A document is drawn as: class from P(c), length L from P(len | c), then
/// L words drawn independently from P(w | c), in that order.
pub struct CorpusSampler {
    classes: Categorical<u32>,
    per_class: Vec<ClassSampler>,
    vocabulary: Vec<String>,
}

impl CorpusSampler {
    pub fn new(model: &CorpusModel) -> Result<Self> {
        model.check()?;
        let vocabulary: Vec<String> = model.vocabulary().into_iter().map(str::to_owned).collect();
        let mut per_class = Vec::with_capacity(model.classes().len());
        let mut class_weights = Vec::with_capacity(model.classes().len());
        for (i, (label, stats)) in model.classes().iter().enumerate() {
            // word_counts iterates in sorted order, as does the vocabulary,
            // so a merge walk assigns vocabulary ids.
            let mut ids = Vec::with_capacity(stats.word_counts.len());
            let mut v = 0usize;
            for (word, &n) in &stats.word_counts {
                while vocabulary[v] != *word {
                    v += 1;
                }
                ids.push((v as u32, n));
            }
            per_class.push(ClassSampler {
                label: label.clone(),
                lengths: Categorical::new(stats.length_histogram.iter().map(|(&l, &n)| (l, n)))?,
                words: Categorical::new(ids)?,
            });
            class_weights.push((i as u32, stats.doc_count));
        }
        Ok(CorpusSampler {
            classes: Categorical::new(class_weights)?,
            per_class,
            vocabulary,
        })
    }

    pub fn generate_document<R: Rng + ?Sized>(&self, rng: &mut R) -> Document {
        let class = &self.per_class[*self.classes.sample(rng) as usize];
        let len = *class.lengths.sample(rng);
        let tokens = (0..len)
            .map(|_| self.vocabulary[*class.words.sample(rng) as usize].clone())
            .collect();
        Document { label: class.label.clone(), tokens }
    }

    /// Same draws as [`generate_document`](Self::generate_document), written
    /// straight into `out` as one line. Returns the line length.
    pub fn write_document<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut Vec<u8>, unlabeled: bool) -> usize {
        let start = out.len();
        let class = &self.per_class[*self.classes.sample(rng) as usize];
        let len = *class.lengths.sample(rng);
        if !unlabeled {
            out.extend_from_slice(class.label.as_bytes());
            out.push(b'\t');
        }
        for i in 0..len {
            if i > 0 {
                out.push(b' ');
            }
            let word = &self.vocabulary[*class.words.sample(rng) as usize];
            out.extend_from_slice(word.as_bytes());
        }
        out.push(b'\n');
        out.len() - start
    }

    /// Documents of a doc-count target, in output order.
    pub fn documents(&self, spec: GenerationSpec) -> Result<impl Iterator<Item = Document> + '_> {
        spec.check()?;
        let Target::Docs(n) = spec.target else {
            return Err(Error::InvalidArgument("document iteration needs a document-count target".into()));
        };
        let chunk_size = spec.chunk_size;
        let mut rng = chunk_rng(spec.master_seed, 0);
        Ok((0..n).map(move |i| {
            if i > 0 && i % chunk_size == 0 {
                rng = chunk_rng(spec.master_seed, i / chunk_size);
            }
            self.generate_document(&mut rng)
        }))
    }

    fn render_chunk(&self, spec: &GenerationSpec, index: u64, unlabeled: bool) -> Chunk {
        let count = match spec.target {
            Target::Docs(n) => spec.chunk_size.min(n - index * spec.chunk_size),
            Target::Bytes(_) => spec.chunk_size,
        };
        let mut rng: StreamRng = chunk_rng(spec.master_seed, index);
        let mut chunk = Chunk { bytes: Vec::new(), ends: Vec::with_capacity(count as usize) };
        for _ in 0..count {
            self.write_document(&mut rng, &mut chunk.bytes, unlabeled);
            chunk.ends.push(chunk.bytes.len());
        }
        chunk
    }
}

struct Chunk {
    bytes: Vec<u8>,
    ends: Vec<usize>,
}

/// Writes a synthetic corpus to `sink`.
///
/// Document `i` is drawn from the stream of chunk `i / chunk_size`, so the
/// output is a pure function of `(model, spec)` and the line format; the
/// thread count only changes how many chunks are rendered concurrently.
pub fn generate_corpus<W: Write>(
    model: &CorpusModel,
    spec: &GenerationSpec,
    options: OutputOptions,
    sink: &mut W,
) -> Result<GenerationSummary> {
    spec.check()?;
    let sampler = CorpusSampler::new(model)?;
    generate_with(&sampler, spec, options, sink)
}

pub fn generate_with<W: Write>(
    sampler: &CorpusSampler,
    spec: &GenerationSpec,
    options: OutputOptions,
    sink: &mut W,
) -> Result<GenerationSummary> {
    spec.check()?;
    let threads = options.threads.max(1) as u64;
    let total_chunks = match spec.target {
        Target::Docs(n) => Some(n.div_ceil(spec.chunk_size)),
        Target::Bytes(_) => None,
    };
    let mut summary = GenerationSummary::default();
    let mut next = 0u64;
    loop {
        let end = match total_chunks {
            Some(total) => total.min(next + threads),
            None => next + threads,
        };
        if next >= end {
            return Ok(summary);
        }
        let chunks: Vec<Chunk> = if threads == 1 {
            vec![sampler.render_chunk(spec, next, options.unlabeled)]
        } else {
            thread::scope(|s| {
                let handles: Vec<_> = (next..end)
                    .map(|i| s.spawn(move || sampler.render_chunk(spec, i, options.unlabeled)))
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("chunk worker panicked"))
                    .collect()
            })
        };
        for chunk in &chunks {
            if write_chunk(chunk, spec.target, &mut summary, sink)? {
                sink.flush().map_err(|source| Error::SinkWrite { docs_written: summary.docs_written, source })?;
                return Ok(summary);
            }
        }
        next = end;
    }
}

/// Writes as much of `chunk` as the target allows. Returns true once the
/// target is reached.
fn write_chunk<W: Write>(chunk: &Chunk, target: Target, summary: &mut GenerationSummary, sink: &mut W) -> Result<bool> {
    let (take, done) = match target {
        Target::Docs(n) => {
            let remaining = (n - summary.docs_written) as usize;
            let take = remaining.min(chunk.ends.len());
            (take, take == remaining)
        }
        Target::Bytes(limit) => {
            let need = limit.saturating_sub(summary.bytes_written) as usize;
            match chunk.ends.iter().position(|&e| e >= need) {
                Some(i) => (i + 1, true),
                None => (chunk.ends.len(), false),
            }
        }
    };
    let len = if take == 0 { 0 } else { chunk.ends[take - 1] };
    sink.write_all(&chunk.bytes[..len])
        .map_err(|source| Error::SinkWrite { docs_written: summary.docs_written, source })?;
    summary.docs_written += take as u64;
    summary.bytes_written += len as u64;
    Ok(done)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::model::analyze_corpus;
    use std::io;

    fn degenerate() -> CorpusModel {
        analyze_corpus([Document::new("A", ["x", "x"])]).unwrap()
    }

    fn two_class() -> CorpusModel {
        analyze_corpus([
            Document::new("A", ["a1", "a2", "a1"]),
            Document::new("A", ["a3"]),
            Document::new("B", ["b1", "b2"]),
        ])
        .unwrap()
    }

    fn render(model: &CorpusModel, spec: GenerationSpec, options: OutputOptions) -> (Vec<u8>, GenerationSummary) {
        let mut out = Vec::new();
        let summary = generate_corpus(model, &spec, options, &mut out).unwrap();
        (out, summary)
    }

    #[test]
    fn degenerate_model_repeats_single_document() {
        let sampler = CorpusSampler::new(&degenerate()).unwrap();
        let mut rng = chunk_rng(3, 0);
        for _ in 0..20 {
            assert_eq!(sampler.generate_document(&mut rng), Document::new("A", ["x", "x"]));
        }
    }

    #[test]
    fn degenerate_model_doc_target() {
        let model = analyze_corpus([Document::new("A", ["x", "x"])]).unwrap();
        let (out, summary) = render(&model, GenerationSpec::docs(3, 1), OutputOptions::default());
        assert_eq!(out, b"A\tx x\nA\tx x\nA\tx x\n");
        assert_eq!(summary, GenerationSummary { docs_written: 3, bytes_written: 18 });
    }

    #[test]
    fn tokens_come_from_their_class() {
        let model = analyze_corpus([Document::new("A", ["x"]), Document::new("B", ["y"])]).unwrap();
        let sampler = CorpusSampler::new(&model).unwrap();
        let mut rng = chunk_rng(5, 0);
        let mut seen = std::collections::BTreeSet::new();
        for _ in 0..200 {
            let d = sampler.generate_document(&mut rng);
            let expect = if d.label == "A" { "x" } else { "y" };
            assert_eq!(d.tokens, [expect]);
            seen.insert(d.label);
        }
        assert_eq!(seen.len(), 2);
    }

    #[test]
    fn write_document_matches_generate_document() {
        let sampler = CorpusSampler::new(&two_class()).unwrap();
        let mut a = chunk_rng(11, 0);
        let mut b = chunk_rng(11, 0);
        for _ in 0..100 {
            let mut line = Vec::new();
            let n = sampler.write_document(&mut a, &mut line, false);
            let doc = sampler.generate_document(&mut b);
            let mut expect = Vec::new();
            doc.write_line(&mut expect, false).unwrap();
            assert_eq!(line, expect);
            assert_eq!(n, line.len());
        }
    }

    #[test]
    fn byte_target_stops_at_first_crossing_document() {
        // Every line is "A\tx x\n", 6 bytes.
        let model = degenerate();
        let (out, s) = render(&model, GenerationSpec::bytes(13, 1), OutputOptions::default());
        assert_eq!(s.docs_written, 3);
        assert_eq!(out.len(), 18);
        let (_, s) = render(&model, GenerationSpec::bytes(12, 1), OutputOptions::default());
        assert_eq!(s.docs_written, 2);
    }

    #[test]
    fn byte_target_crosses_chunk_boundaries() {
        let spec = GenerationSpec { target: Target::Bytes(100), master_seed: 1, chunk_size: 3 };
        let (out, s) = render(&degenerate(), spec, OutputOptions::default());
        assert_eq!(s.docs_written, 17);
        assert_eq!(out.len(), 102);
    }

    #[test]
    fn output_independent_of_threads() {
        let model = two_class();
        for target in [Target::Docs(1234), Target::Bytes(5000)] {
            let spec = GenerationSpec { target, master_seed: 99, chunk_size: 50 };
            let (one, s1) = render(&model, spec, OutputOptions { unlabeled: false, threads: 1 });
            for threads in [2, 3, 8] {
                let (many, s) = render(&model, spec, OutputOptions { unlabeled: false, threads });
                assert_eq!(one, many, "threads={threads}");
                assert_eq!(s1, s);
            }
        }
    }

    #[test]
    fn documents_iterator_matches_written_output() {
        let model = two_class();
        let spec = GenerationSpec { target: Target::Docs(250), master_seed: 4, chunk_size: 64 };
        let (out, _) = render(&model, spec, OutputOptions::default());
        let sampler = CorpusSampler::new(&model).unwrap();
        let mut expect = Vec::new();
        for doc in sampler.documents(spec).unwrap() {
            doc.write_line(&mut expect, false).unwrap();
        }
        assert_eq!(out, expect);
    }

    #[test]
    fn unlabeled_mode_drops_labels_only() {
        let model = two_class();
        let spec = GenerationSpec::docs(40, 8);
        let (labeled, _) = render(&model, spec, OutputOptions::default());
        let (bare, s) = render(&model, spec, OutputOptions { unlabeled: true, threads: 1 });
        let stripped: Vec<u8> = String::from_utf8(labeled)
            .unwrap()
            .lines()
            .map(|l| format!("{}\n", l.split_once('\t').unwrap().1))
            .collect::<String>()
            .into_bytes();
        assert_eq!(bare, stripped);
        assert_eq!(s.bytes_written as usize, bare.len());
    }

    #[test]
    fn invalid_specs_rejected() {
        let model = degenerate();
        let mut out = Vec::new();
        for spec in [
            GenerationSpec::docs(0, 1),
            GenerationSpec::bytes(0, 1),
            GenerationSpec { target: Target::Docs(1), master_seed: 1, chunk_size: 0 },
        ] {
            assert!(matches!(
                generate_corpus(&model, &spec, OutputOptions::default(), &mut out),
                Err(Error::InvalidArgument(_))
            ));
        }
    }

    struct FailAfter(usize);

    impl Write for FailAfter {
        fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
            if self.0 == 0 {
                return Err(io::Error::other("disk full"));
            }
            self.0 -= 1;
            Ok(buf.len())
        }
        fn flush(&mut self) -> io::Result<()> {
            Ok(())
        }
    }

    #[test]
    fn sink_failure_reports_documents_written() {
        let spec = GenerationSpec { target: Target::Docs(10), master_seed: 1, chunk_size: 2 };
        let err = generate_corpus(&degenerate(), &spec, OutputOptions::default(), &mut FailAfter(2)).unwrap_err();
        match err {
            Error::SinkWrite { docs_written, .. } => assert_eq!(docs_written, 4),
            other => panic!("unexpected {other:?}"),
        }
    }
}
