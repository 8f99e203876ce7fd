//! Line-oriented corpus files.
//!
//! ```text
//! #format raw
//! d1<TAB>apple:2 pear:1
//! d2<TAB>pear:3
//! ```
//!
//! `#format weighted` files carry `index:weight` pairs instead and may declare
//! `#dim N`. Other `#` lines are kept as metadata. Raw files are tf-idf
//! weighted on load; weighted files are only normalized.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use pivotree_core::{Corpus, SparseVector, Vocabulary};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusFormat {
    Raw,
    Weighted,
}

pub type RawRecord = (String, Vec<(String, u32)>);
pub type WeightedRecord = (String, Vec<(u32, f64)>);

#[derive(Debug, Clone, PartialEq)]
pub enum Records {
    Raw(Vec<RawRecord>),
    Weighted(Vec<WeightedRecord>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusFile {
    pub dim: Option<usize>,
    /// Free-form `#` header lines other than `#format` and `#dim`, without the `#`.
    pub meta: Vec<String>,
    pub records: Records,
}

impl CorpusFile {
    pub fn raw(records: Vec<RawRecord>) -> Self {
        Self { dim: None, meta: Vec::new(), records: Records::Raw(records) }
    }

    pub fn weighted(dim: usize, records: Vec<WeightedRecord>) -> Self {
        Self { dim: Some(dim), meta: Vec::new(), records: Records::Weighted(records) }
    }

    pub fn format(&self) -> CorpusFormat {
        match self.records {
            Records::Raw(_) => CorpusFormat::Raw,
            Records::Weighted(_) => CorpusFormat::Weighted,
        }
    }

    pub fn len(&self) -> usize {
        match &self.records {
            Records::Raw(r) => r.len(),
            Records::Weighted(r) => r.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut format = None;
        let mut dim = None;
        let mut meta = Vec::new();
        let mut raw = Vec::new();
        let mut weighted = Vec::new();
        let mut ids = HashSet::new();
        for (n, line) in text.lines().enumerate() {
            let line_no = n + 1;
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() {
                continue;
            }
            if let Some(header) = line.strip_prefix('#') {
                let mut parts = header.split_whitespace();
                match parts.next() {
                    Some("format") => {
                        if !raw.is_empty() || !weighted.is_empty() {
                            return Err(parse_err(line_no, "#format must precede documents"));
                        }
                        format = Some(match parts.next() {
                            Some("raw") => CorpusFormat::Raw,
                            Some("weighted") => CorpusFormat::Weighted,
                            other => return Err(parse_err(line_no, format!("unknown format {other:?}"))),
                        });
                    }
                    Some("dim") => {
                        let d = parts
                            .next()
                            .and_then(|d| d.parse::<usize>().ok())
                            .filter(|&d| d > 0)
                            .ok_or_else(|| parse_err(line_no, "#dim needs a positive integer"))?;
                        dim = Some(d);
                    }
                    _ => meta.push(header.trim().to_string()),
                }
                continue;
            }
            let (id, body) = match line.split_once('\t') {
                Some((id, body)) => (id.trim(), body),
                None => line.trim().split_once(char::is_whitespace).unwrap_or((line.trim(), "")),
            };
            if id.is_empty() {
                return Err(parse_err(line_no, "missing document id"));
            }
            if !ids.insert(id.to_string()) {
                return Err(Error::DuplicateId { line: line_no, id: id.to_string() });
            }
            match format.unwrap_or(CorpusFormat::Raw) {
                CorpusFormat::Raw => raw.push((id.to_string(), parse_raw_terms(body, line_no)?)),
                CorpusFormat::Weighted => weighted.push((id.to_string(), parse_weighted_terms(body, line_no, dim)?)),
            }
        }
        let records = match format.unwrap_or(CorpusFormat::Raw) {
            CorpusFormat::Raw => Records::Raw(raw),
            CorpusFormat::Weighted => Records::Weighted(weighted),
        };
        Ok(Self { dim, meta, records })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        match &self.records {
            Records::Raw(records) => {
                out.push_str("#format raw\n");
                self.write_meta(&mut out);
                for (id, terms) in records {
                    out.push_str(id);
                    out.push('\t');
                    for (i, (t, c)) in terms.iter().enumerate() {
                        if i > 0 {
                            out.push(' ');
                        }
                        let _ = write!(out, "{t}:{c}");
                    }
                    out.push('\n');
                }
            }
            Records::Weighted(records) => {
                out.push_str("#format weighted\n");
                self.write_meta(&mut out);
                for (id, entries) in records {
                    out.push_str(id);
                    out.push('\t');
                    for (i, (t, w)) in entries.iter().enumerate() {
                        if i > 0 {
                            out.push(' ');
                        }
                        // `{}` on f64 prints the shortest string that parses back exactly.
                        let _ = write!(out, "{t}:{w}");
                    }
                    out.push('\n');
                }
            }
        }
        out
    }

    fn write_meta(&self, out: &mut String) {
        if let Some(d) = self.dim {
            let _ = writeln!(out, "#dim {d}");
        }
        for m in &self.meta {
            let _ = writeln!(out, "#{m}");
        }
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    /// Builds the corpus: tf-idf for raw files, normalization only for weighted ones.
    pub fn to_corpus(&self) -> Result<Corpus> {
        match &self.records {
            Records::Raw(records) => Ok(Corpus::tfidf_weigh(records)?),
            Records::Weighted(records) => {
                let dim = self.dim.unwrap_or_else(|| max_index(records) + 1);
                Ok(Corpus::from_weighted(dim, records.clone())?)
            }
        }
    }

    /// Interprets every record as a query in `corpus`'s space. Raw records are
    /// weighted with `vocabulary` (unknown terms dropped); weighted records are
    /// normalized.
    pub fn to_queries(&self, dim: usize, vocabulary: Option<&Vocabulary>) -> Result<Vec<(String, SparseVector)>> {
        match &self.records {
            Records::Raw(records) => {
                let vocab = vocabulary.ok_or(pivotree_core::Error::NoVocabulary)?;
                records
                    .iter()
                    .map(|(id, terms)| {
                        let v = vocab.weigh(dim, terms).map_err(|e| match e {
                            pivotree_core::Error::EmptyDocument(_) => pivotree_core::Error::EmptyDocument(id.clone()),
                            other => other,
                        })?;
                        Ok((id.clone(), v))
                    })
                    .collect()
            }
            Records::Weighted(records) => records
                .iter()
                .map(|(id, entries)| {
                    let v = SparseVector::from_unsorted(dim, entries.clone())?
                        .normalize()
                        .map_err(|_| pivotree_core::Error::EmptyDocument(id.clone()))?;
                    Ok((id.clone(), v))
                })
                .collect(),
        }
    }
}

fn max_index(records: &[WeightedRecord]) -> usize {
    records.iter().flat_map(|(_, e)| e.iter().map(|&(i, _)| i as usize)).max().unwrap_or(0)
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

pub(crate) fn parse_raw_terms(body: &str, line: usize) -> Result<Vec<(String, u32)>> {
    body.split_whitespace()
        .map(|tok| {
            let (term, count) =
                tok.rsplit_once(':').ok_or_else(|| parse_err(line, format!("expected term:count, got {tok:?}")))?;
            let count: u32 = count
                .parse()
                .ok()
                .filter(|&c| c > 0)
                .ok_or_else(|| parse_err(line, format!("count in {tok:?} must be a positive integer")))?;
            if term.is_empty() {
                return Err(parse_err(line, format!("empty term in {tok:?}")));
            }
            Ok((term.to_string(), count))
        })
        .collect()
}

pub(crate) fn parse_weighted_terms(body: &str, line: usize, dim: Option<usize>) -> Result<Vec<(u32, f64)>> {
    body.split_whitespace()
        .map(|tok| {
            let (idx, w) =
                tok.split_once(':').ok_or_else(|| parse_err(line, format!("expected index:weight, got {tok:?}")))?;
            let idx: u32 = idx.parse().map_err(|_| parse_err(line, format!("bad index in {tok:?}")))?;
            if dim.is_some_and(|d| idx as usize >= d) {
                return Err(parse_err(line, format!("index {idx} is outside #dim")));
            }
            let w: f64 = w
                .parse()
                .ok()
                .filter(|w: &f64| w.is_finite())
                .ok_or_else(|| parse_err(line, format!("bad weight in {tok:?}")))?;
            Ok((idx, w))
        })
        .collect()
}

/// Reads and ingests a corpus file.
pub fn parse_corpus(path: impl AsRef<Path>) -> Result<Corpus> {
    CorpusFile::read(path)?.to_corpus()
}
