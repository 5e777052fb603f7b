//! Labeled documents and the `label<TAB>token token ...` line format.

use std::io::{self, BufRead, Write};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Document {
    pub label: String,
    pub tokens: Vec<String>,
}

impl Document {
    pub fn new<L, I, S>(label: L, tokens: I) -> Self
    where
        L: Into<String>,
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Document {
            label: label.into(),
            tokens: tokens.into_iter().map(Into::into).collect(),
        }
    }

    /// Checks the document invariants, returning a description of the first
    /// violation.
    pub fn check(&self) -> std::result::Result<(), String> {
        if self.label.is_empty() {
            return Err("empty label".into());
        }
        if self.label.contains(['\t', '\n', '\r']) {
            return Err("label contains tab or newline".into());
        }
        if self.tokens.is_empty() {
            return Err("empty token list".into());
        }
        for token in &self.tokens {
            if token.is_empty() || token.contains(char::is_whitespace) {
                return Err(format!("invalid token {token:?}"));
            }
        }
        Ok(())
    }

    /// Parses one line (without its terminator). `index` is the zero-based
    /// record number used in error messages.
    pub fn parse_line(line: &str, index: usize) -> Result<Self> {
        let line = line.strip_suffix('\r').unwrap_or(line);
        let (label, body) = line.split_once('\t').ok_or_else(|| Error::MalformedDocument {
            index,
            reason: "missing tab separator".into(),
        })?;
        let doc = Document {
            label: label.to_owned(),
            tokens: body.split_ascii_whitespace().map(str::to_owned).collect(),
        };
        doc.check()
            .map_err(|reason| Error::MalformedDocument { index, reason })?;
        Ok(doc)
    }

    /// Number of bytes `write_line` emits for this document.
    pub fn line_len(&self, unlabeled: bool) -> usize {
        let tokens: usize = self.tokens.iter().map(String::len).sum::<usize>()
            + self.tokens.len().saturating_sub(1);
        let prefix = if unlabeled { 0 } else { self.label.len() + 1 };
        prefix + tokens + 1
    }

    /// Writes the document as one LF-terminated line and returns the number
    /// of bytes written.
    pub fn write_line<W: Write + ?Sized>(&self, out: &mut W, unlabeled: bool) -> io::Result<usize> {
        if !unlabeled {
            out.write_all(self.label.as_bytes())?;
            out.write_all(b"\t")?;
        }
        for (i, token) in self.tokens.iter().enumerate() {
            if i > 0 {
                out.write_all(b" ")?;
            }
            out.write_all(token.as_bytes())?;
        }
        out.write_all(b"\n")?;
        Ok(self.line_len(unlabeled))
    }
}

/// Streams documents from a reader, one per line. Blank lines are errors.
pub struct DocumentReader<R> {
    reader: R,
    line: String,
    index: usize,
}

impl<R: BufRead> DocumentReader<R> {
    pub fn new(reader: R) -> Self {
        DocumentReader { reader, line: String::new(), index: 0 }
    }
}

impl<R: BufRead> Iterator for DocumentReader<R> {
    type Item = Result<Document>;

    fn next(&mut self) -> Option<Self::Item> {
        self.line.clear();
        match self.reader.read_line(&mut self.line) {
            Ok(0) => None,
            Ok(_) => {
                let line = self.line.strip_suffix('\n').unwrap_or(&self.line);
                let doc = Document::parse_line(line, self.index);
                self.index += 1;
                Some(doc)
            }
            Err(e) => Some(Err(e.into())),
        }
    }
}
