//! Sparse term-space vectors and the document corpus.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// A sparse vector in a `dim`-dimensional term space.
///
/// Entries are kept sorted strictly ascending by term index and every stored
/// weight is finite and nonzero.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseVector {
    dim: usize,
    indices: Vec<u32>,
    values: Vec<f64>,
}

impl SparseVector {
    /// Builds a vector from entries that must already be sorted, in range,
    /// finite and nonzero.
    pub fn new(dim: usize, entries: Vec<(u32, f64)>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidVector("dimension must be positive"));
        }
        let mut indices = Vec::with_capacity(entries.len());
        let mut values = Vec::with_capacity(entries.len());
        for (i, (idx, w)) in entries.into_iter().enumerate() {
            if idx as usize >= dim {
                return Err(Error::InvalidVector("term index out of range"));
            }
            if i > 0 && idx <= indices[i - 1] {
                return Err(Error::InvalidVector("term indices must be strictly increasing"));
            }
            if !w.is_finite() || w == 0.0 {
                return Err(Error::InvalidVector("weights must be finite and nonzero"));
            }
            indices.push(idx);
            values.push(w);
        }
        Ok(Self { dim, indices, values })
    }

    /// Sorts entries, sums duplicate indices and drops exact zeros.
    pub fn from_unsorted(dim: usize, mut entries: Vec<(u32, f64)>) -> Result<Self> {
        entries.sort_by_key(|&(i, _)| i);
        let mut merged: Vec<(u32, f64)> = Vec::with_capacity(entries.len());
        for (i, w) in entries {
            match merged.last_mut() {
                Some(last) if last.0 == i => last.1 += w,
                _ => merged.push((i, w)),
            }
        }
        merged.retain(|&(_, w)| w != 0.0);
        Self::new(dim, merged)
    }

    /// The `i`-th standard basis vector.
    pub fn axis(dim: usize, i: u32) -> Result<Self> {
        Self::new(dim, alloc::vec![(i, 1.0)])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.indices.iter().copied().zip(self.values.iter().copied())
    }

    /// Weight at term `idx`, zero when absent.
    pub fn get(&self, idx: u32) -> f64 {
        match self.indices.binary_search(&idx) {
            Ok(pos) => self.values[pos],
            Err(_) => 0.0,
        }
    }

    /// Inner product by merge join over the sorted entries.
    pub fn dot(&self, other: &SparseVector) -> Result<f64> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { left: self.dim, right: other.dim });
        }
        Ok(self.dot_unchecked(other))
    }

    pub(crate) fn dot_unchecked(&self, other: &SparseVector) -> f64 {
        merge_dot(&self.indices, &self.values, &other.indices, &other.values)
    }

    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    /// Returns the unit vector in the same direction.
    pub fn normalize(&self) -> Result<Self> {
        let n2 = self.norm_sq();
        if n2 <= 0.0 {
            return Err(Error::ZeroVector);
        }
        let norm = libm::sqrt(n2);
        Ok(Self {
            dim: self.dim,
            indices: self.indices.clone(),
            values: self.values.iter().map(|v| v / norm).collect(),
        })
    }

    /// Squared Euclidean distance to `other`, merged over the union of supports.
    pub fn dist_sq(&self, other: &SparseVector) -> Result<f64> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { left: self.dim, right: other.dim });
        }
        let (ai, av, bi, bv) = (&self.indices, &self.values, &other.indices, &other.values);
        let (mut i, mut j, mut acc) = (0, 0, 0.0);
        while i < ai.len() && j < bi.len() {
            let d = match ai[i].cmp(&bi[j]) {
                core::cmp::Ordering::Less => {
                    i += 1;
                    av[i - 1]
                }
                core::cmp::Ordering::Greater => {
                    j += 1;
                    bv[j - 1]
                }
                core::cmp::Ordering::Equal => {
                    i += 1;
                    j += 1;
                    av[i - 1] - bv[j - 1]
                }
            };
            acc += d * d;
        }
        acc += av[i..].iter().map(|v| v * v).sum::<f64>();
        acc += bv[j..].iter().map(|v| v * v).sum::<f64>();
        Ok(acc)
    }
}

fn merge_dot(ai: &[u32], av: &[f64], bi: &[u32], bv: &[f64]) -> f64 {
    let (mut i, mut j, mut acc) = (0, 0, 0.0);
    while i < ai.len() && j < bi.len() {
        match ai[i].cmp(&bi[j]) {
            core::cmp::Ordering::Less => i += 1,
            core::cmp::Ordering::Greater => j += 1,
            core::cmp::Ordering::Equal => {
                acc += av[i] * bv[j];
                i += 1;
                j += 1;
            }
        }
    }
    acc
}

/// Free-function form of [`SparseVector::dot`].
pub fn dot(a: &SparseVector, b: &SparseVector) -> Result<f64> {
    a.dot(b)
}

pub fn norm_sq(a: &SparseVector) -> f64 {
    a.norm_sq()
}

pub fn normalize(a: &SparseVector) -> Result<SparseVector> {
    a.normalize()
}

/// Smoothed inverse document frequency, `ln((1 + N) / (1 + df)) + 1`.
pub fn smoothed_idf(n_docs: usize, df: usize) -> f64 {
    libm::log((1.0 + n_docs as f64) / (1.0 + df as f64)) + 1.0
}

#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    pub id: String,
    pub vector: SparseVector,
}

/// A unit-normalized document collection.
///
/// Corpora built from raw term counts also carry their vocabulary (terms in
/// first-appearance order) and the idf table, so queries can be weighted in
/// the same space.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    dim: usize,
    docs: Vec<Document>,
    vocabulary: Option<Vocabulary>,
}

/// Term strings in index order with their idf weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    terms: Vec<String>,
    index: BTreeMap<String, u32>,
    idf: Vec<f64>,
}

impl Vocabulary {
    pub fn new(terms: Vec<String>, idf: Vec<f64>) -> Result<Self> {
        if terms.len() != idf.len() {
            return Err(Error::InvalidConfig("idf table length differs from vocabulary"));
        }
        let index: BTreeMap<String, u32> = terms.iter().enumerate().map(|(i, t)| (t.clone(), i as u32)).collect();
        if index.len() != terms.len() {
            return Err(Error::InvalidConfig("vocabulary contains a duplicate term"));
        }
        Ok(Self { terms, index, idf })
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn idf(&self) -> &[f64] {
        &self.idf
    }

    pub fn term_index(&self, term: &str) -> Option<u32> {
        self.index.get(term).copied()
    }

    /// Weighs raw term counts as `count · idf` in a `dim`-dimensional space
    /// and normalizes. Unknown terms are dropped.
    pub fn weigh<T: AsRef<str>>(&self, dim: usize, counts: &[(T, u32)]) -> Result<SparseVector> {
        let entries: Vec<(u32, f64)> = counts
            .iter()
            .filter(|(_, c)| *c > 0)
            .filter_map(|(t, c)| self.term_index(t.as_ref()).map(|i| (i, f64::from(*c) * self.idf[i as usize])))
            .collect();
        SparseVector::from_unsorted(dim, entries)?.normalize().map_err(|_| Error::EmptyDocument("query".into()))
    }
}

impl Corpus {
    /// Builds a tf-idf corpus from raw `(doc_id, [(term, count)])` records.
    ///
    /// Weight is `count · idf(term)`; each document is then normalized.
    pub fn tfidf_weigh<D, T>(raw: &[(D, Vec<(T, u32)>)]) -> Result<Self>
    where
        D: AsRef<str>,
        T: AsRef<str>,
    {
        if raw.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let mut vocab: BTreeMap<String, u32> = BTreeMap::new();
        let mut terms: Vec<String> = Vec::new();
        let mut df: Vec<usize> = Vec::new();
        let mut counted: Vec<Vec<(u32, f64)>> = Vec::with_capacity(raw.len());
        for (doc_id, counts) in raw {
            let mut entries: Vec<(u32, f64)> = Vec::with_capacity(counts.len());
            for (term, count) in counts {
                let term = term.as_ref();
                if *count == 0 {
                    return Err(Error::NonPositiveCount { doc: doc_id.as_ref().into(), term: term.into() });
                }
                let idx = match vocab.get(term) {
                    Some(&i) => i,
                    None => {
                        let i = terms.len() as u32;
                        vocab.insert(term.into(), i);
                        terms.push(term.into());
                        df.push(0);
                        i
                    }
                };
                entries.push((idx, f64::from(*count)));
            }
            entries.sort_by_key(|&(i, _)| i);
            let mut merged: Vec<(u32, f64)> = Vec::with_capacity(entries.len());
            for (i, c) in entries {
                match merged.last_mut() {
                    Some(last) if last.0 == i => last.1 += c,
                    _ => merged.push((i, c)),
                }
            }
            for &(i, _) in &merged {
                df[i as usize] += 1;
            }
            counted.push(merged);
        }
        let n = raw.len();
        let idf: Vec<f64> = df.iter().map(|&d| smoothed_idf(n, d)).collect();
        let dim = terms.len().max(1);
        let mut docs = Vec::with_capacity(n);
        for ((doc_id, _), entries) in raw.iter().zip(counted) {
            let weighted: Vec<(u32, f64)> = entries.into_iter().map(|(i, c)| (i, c * idf[i as usize])).collect();
            let vector = SparseVector::new(dim, weighted)?
                .normalize()
                .map_err(|_| Error::EmptyDocument(doc_id.as_ref().into()))?;
            docs.push(Document { id: doc_id.as_ref().into(), vector });
        }
        let corpus = Self { dim, docs, vocabulary: Some(Vocabulary { terms, index: vocab, idf }) };
        corpus.check_unique_ids()?;
        Ok(corpus)
    }

    /// Builds a corpus from pre-weighted vectors; each one is only normalized.
    pub fn from_weighted<D: Into<String>>(dim: usize, raw: Vec<(D, Vec<(u32, f64)>)>) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let mut docs = Vec::with_capacity(raw.len());
        for (doc_id, entries) in raw {
            let id: String = doc_id.into();
            let vector =
                SparseVector::from_unsorted(dim, entries)?.normalize().map_err(|_| Error::EmptyDocument(id.clone()))?;
            docs.push(Document { id, vector });
        }
        let corpus = Self { dim, docs, vocabulary: None };
        corpus.check_unique_ids()?;
        Ok(corpus)
    }

    /// Reassembles a corpus from parts, validating its invariants.
    pub fn from_parts(dim: usize, docs: Vec<Document>, vocabulary: Option<Vocabulary>) -> Result<Self> {
        if docs.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        if docs.iter().any(|d| d.vector.dim() != dim) {
            return Err(Error::InvalidVector("document dimension differs from corpus"));
        }
        let corpus = Self { dim, docs, vocabulary };
        corpus.check_unique_ids()?;
        Ok(corpus)
    }

    fn check_unique_ids(&self) -> Result<()> {
        let mut seen = BTreeMap::new();
        for d in &self.docs {
            if seen.insert(d.id.as_str(), ()).is_some() {
                return Err(Error::DuplicateDocId(d.id.clone()));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn docs(&self) -> &[Document] {
        &self.docs
    }

    pub fn vector(&self, doc: usize) -> &SparseVector {
        &self.docs[doc].vector
    }

    pub fn id(&self, doc: usize) -> &str {
        &self.docs[doc].id
    }

    pub fn position(&self, doc_id: &str) -> Option<usize> {
        self.docs.iter().position(|d| d.id == doc_id)
    }

    /// Vocabulary and idf table; `None` for pre-weighted corpora.
    pub fn vocabulary(&self) -> Option<&Vocabulary> {
        self.vocabulary.as_ref()
    }

    /// Terms in index order; empty for pre-weighted corpora.
    pub fn terms(&self) -> &[String] {
        self.vocabulary.as_ref().map_or(&[], |v| v.terms())
    }

    pub fn term_index(&self, term: &str) -> Option<u32> {
        self.vocabulary.as_ref().and_then(|v| v.term_index(term))
    }

    pub fn idf(&self) -> Option<&[f64]> {
        self.vocabulary.as_ref().map(|v| v.idf())
    }

    /// Weighs raw query term counts with the corpus idf table and normalizes.
    /// Terms outside the vocabulary are dropped.
    pub fn weigh_query<T: AsRef<str>>(&self, counts: &[(T, u32)]) -> Result<SparseVector> {
        self.vocabulary.as_ref().ok_or(Error::NoVocabulary)?.weigh(self.dim, counts)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn sv(dim: usize, e: &[(u32, f64)]) -> SparseVector {
        SparseVector::new(dim, e.to_vec()).unwrap()
    }

    #[test]
    fn dot_examples() {
        let e1 = SparseVector::axis(10, 1).unwrap();
        let e2 = SparseVector::axis(10, 2).unwrap();
        assert_eq!(e1.dot(&e1).unwrap(), 1.0);
        assert_eq!(e1.dot(&e2).unwrap(), 0.0);
        let a = sv(10, &[(1, 0.6), (4, 0.8)]);
        let b = sv(10, &[(4, 0.5), (7, 0.5)]);
        assert!((a.dot(&b).unwrap() - 0.4).abs() < 1e-15);
    }

    #[test]
    fn dot_dimension_mismatch() {
        let a = SparseVector::axis(3, 0).unwrap();
        let b = SparseVector::axis(4, 0).unwrap();
        assert_eq!(a.dot(&b), Err(Error::DimensionMismatch { left: 3, right: 4 }));
    }

    #[test]
    fn norm_and_normalize() {
        assert_eq!(SparseVector::axis(3, 1).unwrap().norm_sq(), 1.0);
        let v = sv(3, &[(1, 3.0), (2, 4.0)]);
        assert_eq!(v.norm_sq(), 25.0);
        assert_eq!(SparseVector::new(3, vec![]).unwrap().norm_sq(), 0.0);
        let n = v.normalize().unwrap();
        assert!((n.get(1) - 0.6).abs() < 1e-15 && (n.get(2) - 0.8).abs() < 1e-15);
        let e5 = SparseVector::axis(8, 5).unwrap();
        assert_eq!(e5.normalize().unwrap(), e5);
    }

    #[test]
    fn normalize_zero_vector_fails() {
        let err = SparseVector::new(3, vec![]).unwrap().normalize().unwrap_err();
        assert_eq!(err, Error::ZeroVector);
        assert_eq!(alloc::format!("{err}"), "cannot normalize empty document");
    }

    #[test]
    fn rejects_malformed_entries() {
        assert!(SparseVector::new(5, vec![(2, 1.0), (1, 1.0)]).is_err());
        assert!(SparseVector::new(5, vec![(1, 1.0), (1, 1.0)]).is_err());
        assert!(SparseVector::new(5, vec![(5, 1.0)]).is_err());
        assert!(SparseVector::new(5, vec![(1, 0.0)]).is_err());
        assert!(SparseVector::new(5, vec![(1, f64::NAN)]).is_err());
        let merged = SparseVector::from_unsorted(5, vec![(3, 1.0), (1, 2.0), (3, -1.0)]).unwrap();
        assert_eq!(merged.indices(), &[1]);
    }

    #[test]
    fn tfidf_single_term_weight() {
        // N = 2, term "x" in one doc with count 1.
        assert!((smoothed_idf(2, 1) - 1.405_465_108_108_164_4).abs() < 1e-12);
    }

    #[test]
    fn tfidf_ratio_two_to_one() {
        let c = Corpus::tfidf_weigh(&[("d", vec![("a", 2u32), ("b", 1)])]).unwrap();
        let v = c.vector(0);
        assert!((v.get(0) - 0.894_427_191).abs() < 1e-9);
        assert!((v.get(1) - 0.447_213_595).abs() < 1e-9);
        assert_eq!(c.terms(), &["a", "b"]);
    }

    #[test]
    fn tfidf_errors() {
        let empty: [(&str, Vec<(&str, u32)>); 0] = [];
        assert_eq!(Corpus::tfidf_weigh(&empty), Err(Error::EmptyCorpus));
        let err = Corpus::tfidf_weigh(&[("d1", vec![("a", 1u32)]), ("d2", vec![])]).unwrap_err();
        assert_eq!(err, Error::EmptyDocument("d2".into()));
        let err = Corpus::tfidf_weigh(&[("d1", vec![("a", 0u32)])]).unwrap_err();
        assert!(matches!(err, Error::NonPositiveCount { .. }));
        let err = Corpus::tfidf_weigh(&[("d1", vec![("a", 1u32)]), ("d1", vec![("b", 1)])]).unwrap_err();
        assert_eq!(err, Error::DuplicateDocId("d1".into()));
    }

    #[test]
    fn query_weighting_drops_unknown_terms() {
        let c = Corpus::tfidf_weigh(&[("d1", vec![("a", 1u32)]), ("d2", vec![("b", 1)])]).unwrap();
        let q = c.weigh_query(&[("a", 1u32), ("zzz", 3)]).unwrap();
        assert_eq!(q.indices(), &[0]);
        assert_eq!(c.weigh_query(&[("zzz", 1u32)]), Err(Error::EmptyDocument("query".into())));
        let w = Corpus::from_weighted(2, vec![("d1", vec![(0, 0.6), (1, 0.8)])]).unwrap();
        assert_eq!(w.weigh_query(&[("a", 1u32)]), Err(Error::NoVocabulary));
    }
}
