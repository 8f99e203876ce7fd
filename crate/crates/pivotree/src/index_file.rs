//! Binary index container shared by pivot trees and ball trees.
//!
//! Little-endian layout:
//!
//! ```text
//! magic "PIVTIDX\0" | version u32 | type u8 (0 MTA, 1 MIP) | default bound u8 (0 safe, 1 heuristic)
//! dim u64 | docs u64 | leaf_capacity u64 | candidate_count u64 | max_depth u64 | seed u64 | score u8
//! corpus fingerprint u32
//! vocabulary flag u8, then count u64 and per term (len u32, utf-8 bytes, idf f64)
//! node count u64, then nodes in pre-order
//! crc32 u32 over everything above
//! ```
//!
//! Pivot-tree node: kind u8, min f64, max f64, size u64, then either
//! (pivot u64, split f64, alpha f64, depth u64, w[depth] f64, pivot_dots[depth] f64)
//! or (count u64, docs u64...). Ball node: kind u8, radius f64, size u64,
//! centroid (nnz u64, (u32, f64)...), then leaf docs as above. Children of an
//! internal node follow it, left subtree first. All reals are stored as raw
//! IEEE-754 bits.

use std::path::Path;

use pivotree_core::baselines::BallKind;
use pivotree_core::{
    BallNode, BallTree, BoundKind, BuildConfig, Corpus, ExtensionRecord, NodeKind, PivotNode, PivotScore, PivotTree,
    SparseVector, Vocabulary,
};

use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"PIVTIDX\0";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum IndexBody {
    Mta(PivotTree),
    Mip(BallTree),
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndexFile {
    pub default_bound: BoundKind,
    pub corpus_fingerprint: u32,
    pub vocabulary: Option<Vocabulary>,
    pub body: IndexBody,
}

impl IndexFile {
    pub fn mta(tree: PivotTree, corpus: &Corpus, default_bound: BoundKind) -> Self {
        Self {
            default_bound,
            corpus_fingerprint: corpus_fingerprint(corpus),
            vocabulary: corpus.vocabulary().cloned(),
            body: IndexBody::Mta(tree),
        }
    }

    pub fn mip(tree: BallTree, corpus: &Corpus) -> Self {
        Self {
            default_bound: BoundKind::Safe,
            corpus_fingerprint: corpus_fingerprint(corpus),
            vocabulary: corpus.vocabulary().cloned(),
            body: IndexBody::Mip(tree),
        }
    }

    pub fn type_name(&self) -> &'static str {
        match self.body {
            IndexBody::Mta(_) => "MTA",
            IndexBody::Mip(_) => "MIP",
        }
    }

    pub fn dim(&self) -> usize {
        match &self.body {
            IndexBody::Mta(t) => t.dim,
            IndexBody::Mip(t) => t.dim,
        }
    }

    /// Fails unless `corpus` is the one the index was built from.
    pub fn check_corpus(&self, corpus: &Corpus) -> Result<()> {
        if corpus_fingerprint(corpus) == self.corpus_fingerprint {
            Ok(())
        } else {
            Err(Error::CorpusMismatch)
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::default();
        w.bytes(MAGIC);
        w.u32(FORMAT_VERSION);
        w.u8(match self.body {
            IndexBody::Mta(_) => 0,
            IndexBody::Mip(_) => 1,
        });
        w.u8(bound_tag(self.default_bound));
        match &self.body {
            IndexBody::Mta(t) => {
                w.usize(t.dim);
                w.usize(t.n_docs);
                w.usize(t.config.leaf_capacity);
                w.usize(t.config.candidate_count);
                w.usize(t.config.max_depth);
                w.u64(t.config.rng_seed);
                w.u8(match t.config.score {
                    PivotScore::TraceGain => 0,
                    PivotScore::RawProjection => 1,
                });
            }
            IndexBody::Mip(t) => {
                w.usize(t.dim);
                w.usize(t.n_docs);
                w.usize(t.leaf_capacity);
                w.usize(0);
                w.usize(0);
                w.u64(t.seed);
                w.u8(0);
            }
        }
        w.u32(self.corpus_fingerprint);
        match &self.vocabulary {
            None => w.u8(0),
            Some(v) => {
                w.u8(1);
                w.usize(v.len());
                for (term, idf) in v.terms().iter().zip(v.idf()) {
                    w.u32(term.len() as u32);
                    w.bytes(term.as_bytes());
                    w.f64(*idf);
                }
            }
        }
        match &self.body {
            IndexBody::Mta(t) => {
                w.usize(t.nodes.len());
                for node in &t.nodes {
                    write_pivot_node(&mut w, node);
                }
            }
            IndexBody::Mip(t) => {
                w.usize(t.nodes.len());
                for node in &t.nodes {
                    write_ball_node(&mut w, node);
                }
            }
        }
        let crc = crc32fast::hash(&w.buf);
        w.u32(crc);
        w.buf
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < MAGIC.len() + 4 || &bytes[..MAGIC.len()] != MAGIC {
            return Err(Error::Format("not an index file".into()));
        }
        let (body, footer) = bytes.split_at(bytes.len() - 4);
        let stored = u32::from_le_bytes(footer.try_into().unwrap());
        let computed = crc32fast::hash(body);
        if stored != computed {
            return Err(Error::Checksum { stored, computed });
        }
        let mut r = Reader { buf: body, pos: MAGIC.len() };
        let version = r.u32()?;
        if version != FORMAT_VERSION {
            return Err(Error::Format(format!("unsupported version {version}")));
        }
        let kind = r.u8()?;
        let default_bound = match r.u8()? {
            0 => BoundKind::Safe,
            1 => BoundKind::Heuristic,
            t => return Err(Error::Format(format!("unknown bound tag {t}"))),
        };
        let dim = r.usize()?;
        let n_docs = r.usize()?;
        let leaf_capacity = r.usize()?;
        let candidate_count = r.usize()?;
        let max_depth = r.usize()?;
        let seed = r.u64()?;
        let score = match r.u8()? {
            0 => PivotScore::TraceGain,
            1 => PivotScore::RawProjection,
            t => return Err(Error::Format(format!("unknown score tag {t}"))),
        };
        let corpus_fingerprint = r.u32()?;
        let vocabulary = match r.u8()? {
            0 => None,
            1 => {
                let n = r.len_prefix(12)?;
                let mut terms = Vec::with_capacity(n);
                let mut idf = Vec::with_capacity(n);
                for _ in 0..n {
                    let len = r.u32()? as usize;
                    let raw = r.take(len)?;
                    terms.push(String::from_utf8(raw.to_vec()).map_err(|_| Error::Format("term is not utf-8".into()))?);
                    idf.push(r.f64()?);
                }
                Some(Vocabulary::new(terms, idf)?)
            }
            t => return Err(Error::Format(format!("unknown vocabulary flag {t}"))),
        };
        let node_count = r.len_prefix(17)?;
        let body = match kind {
            0 => {
                let mut nodes = (0..node_count).map(|_| read_pivot_node(&mut r)).collect::<Result<Vec<_>>>()?;
                link_pivot_preorder(&mut nodes)?;
                let config = BuildConfig { leaf_capacity, candidate_count, rng_seed: seed, max_depth, score };
                IndexBody::Mta(PivotTree::from_parts(dim, n_docs, config, nodes)?)
            }
            1 => {
                let mut nodes = (0..node_count).map(|_| read_ball_node(&mut r, dim)).collect::<Result<Vec<_>>>()?;
                link_ball_preorder(&mut nodes)?;
                IndexBody::Mip(BallTree::from_parts(dim, n_docs, leaf_capacity, seed, nodes)?)
            }
            t => return Err(Error::Format(format!("unknown index type {t}"))),
        };
        if r.pos != r.buf.len() {
            return Err(Error::Format("trailing bytes before checksum".into()));
        }
        Ok(Self { default_bound, corpus_fingerprint, vocabulary, body })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }
}

fn bound_tag(kind: BoundKind) -> u8 {
    match kind {
        BoundKind::Safe => 0,
        BoundKind::Heuristic => 1,
    }
}

/// CRC-32 over the corpus dimension, document ids and the exact bits of every
/// stored weight.
pub fn corpus_fingerprint(corpus: &Corpus) -> u32 {
    let mut h = crc32fast::Hasher::new();
    h.update(&(corpus.dim() as u64).to_le_bytes());
    for d in corpus.docs() {
        h.update(&(d.id.len() as u64).to_le_bytes());
        h.update(d.id.as_bytes());
        h.update(&(d.vector.nnz() as u64).to_le_bytes());
        for (i, v) in d.vector.iter() {
            h.update(&i.to_le_bytes());
            h.update(&v.to_bits().to_le_bytes());
        }
    }
    h.finalize()
}

fn write_docs(w: &mut Writer, docs: &[usize]) {
    w.usize(docs.len());
    for &d in docs {
        w.usize(d);
    }
}

fn write_pivot_node(w: &mut Writer, node: &PivotNode) {
    match &node.kind {
        NodeKind::Internal { pivot, ext, split_threshold, .. } => {
            w.u8(1);
            w.f64(node.min_proj_sq);
            w.f64(node.max_proj_sq);
            w.usize(node.size);
            w.usize(*pivot);
            w.f64(*split_threshold);
            w.f64(ext.alpha);
            w.usize(ext.w.len());
            ext.w.iter().for_each(|&x| w.f64(x));
            ext.pivot_dots.iter().for_each(|&x| w.f64(x));
        }
        NodeKind::Leaf { docs } => {
            w.u8(0);
            w.f64(node.min_proj_sq);
            w.f64(node.max_proj_sq);
            w.usize(node.size);
            write_docs(w, docs);
        }
    }
}

fn write_ball_node(w: &mut Writer, node: &BallNode) {
    w.u8(match node.kind {
        BallKind::Leaf { .. } => 0,
        BallKind::Internal { .. } => 1,
    });
    w.f64(node.radius);
    w.usize(node.size);
    w.usize(node.centroid.nnz());
    for (i, v) in node.centroid.iter() {
        w.u32(i);
        w.f64(v);
    }
    if let BallKind::Leaf { docs } = &node.kind {
        write_docs(w, docs);
    }
}

fn truncated() -> Error {
    Error::Format("node stream ends inside a subtree".into())
}

/// Restores child links and depths from pre-order positions.
fn link_pivot_preorder(nodes: &mut [PivotNode]) -> Result<()> {
    fn walk(nodes: &mut [PivotNode], idx: usize, depth: usize) -> Result<usize> {
        let node = nodes.get_mut(idx).ok_or_else(truncated)?;
        node.depth = depth;
        if matches!(node.kind, NodeKind::Leaf { .. }) {
            return Ok(idx + 1);
        }
        let right = walk(nodes, idx + 1, depth + 1)?;
        let end = walk(nodes, right, depth + 1)?;
        if let NodeKind::Internal { left: l, right: r, .. } = &mut nodes[idx].kind {
            *l = idx + 1;
            *r = right;
        }
        Ok(end)
    }
    if walk(nodes, 0, 0)? != nodes.len() {
        return Err(Error::Format("extra nodes after the root subtree".into()));
    }
    Ok(())
}

fn link_ball_preorder(nodes: &mut [BallNode]) -> Result<()> {
    fn walk(nodes: &mut [BallNode], idx: usize) -> Result<usize> {
        let node = nodes.get(idx).ok_or_else(truncated)?;
        if matches!(node.kind, BallKind::Leaf { .. }) {
            return Ok(idx + 1);
        }
        let right = walk(nodes, idx + 1)?;
        let end = walk(nodes, right)?;
        nodes[idx].kind = BallKind::Internal { left: idx + 1, right };
        Ok(end)
    }
    if walk(nodes, 0)? != nodes.len() {
        return Err(Error::Format("extra nodes after the root subtree".into()));
    }
    Ok(())
}

fn read_pivot_node(r: &mut Reader) -> Result<PivotNode> {
    let tag = r.u8()?;
    let min_proj_sq = r.f64()?;
    let max_proj_sq = r.f64()?;
    let size = r.usize()?;
    let kind = match tag {
        0 => NodeKind::Leaf { docs: read_docs(r)? },
        1 => {
            let pivot = r.usize()?;
            let split_threshold = r.f64()?;
            let alpha = r.f64()?;
            let depth = r.len_prefix(16)?;
            let w = (0..depth).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
            let pivot_dots = (0..depth).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
            // Child links are restored by `link_pivot_preorder`.
            NodeKind::Internal {
                pivot,
                ext: ExtensionRecord { alpha, w, pivot_dots },
                split_threshold,
                left: 0,
                right: 0,
            }
        }
        t => return Err(Error::Format(format!("unknown node tag {t}"))),
    };
    Ok(PivotNode { min_proj_sq, max_proj_sq, size, depth: 0, kind })
}

fn read_ball_node(r: &mut Reader, dim: usize) -> Result<BallNode> {
    let tag = r.u8()?;
    let radius = r.f64()?;
    let size = r.usize()?;
    let nnz = r.len_prefix(12)?;
    let mut entries = Vec::with_capacity(nnz);
    for _ in 0..nnz {
        entries.push((r.u32()?, r.f64()?));
    }
    let centroid = SparseVector::new(dim, entries)?;
    let kind = match tag {
        0 => BallKind::Leaf { docs: read_docs(r)? },
        1 => BallKind::Internal { left: 0, right: 0 },
        t => return Err(Error::Format(format!("unknown node tag {t}"))),
    };
    Ok(BallNode { centroid, radius, size, kind })
}

fn read_docs(r: &mut Reader) -> Result<Vec<usize>> {
    let n = r.len_prefix(8)?;
    (0..n).map(|_| r.usize()).collect()
}

#[derive(Default)]
struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    fn bytes(&mut self, b: &[u8]) {
        self.buf.extend_from_slice(b);
    }
    fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }
    fn u32(&mut self, v: u32) {
        self.bytes(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.bytes(&v.to_le_bytes());
    }
    fn usize(&mut self, v: usize) {
        self.u64(v as u64);
    }
    fn f64(&mut self, v: f64) {
        self.u64(v.to_bits());
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.buf.len() - self.pos < n {
            return Err(Error::Format("unexpected end of file".into()));
        }
        let out = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn usize(&mut self) -> Result<usize> {
        usize::try_from(self.u64()?).map_err(|_| Error::Format("value does not fit in usize".into()))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_bits(self.u64()?))
    }
    /// A count whose elements each take at least `min_elem` bytes.
    fn len_prefix(&mut self, min_elem: usize) -> Result<usize> {
        let n = self.usize()?;
        if n.saturating_mul(min_elem) > self.buf.len() - self.pos {
            return Err(Error::Format("length prefix exceeds file size".into()));
        }
        Ok(n)
    }
}
