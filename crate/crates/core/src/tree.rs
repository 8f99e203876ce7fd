//! Offline pivot-tree construction.
//!
//! Each internal node picks a pivot document from its subtree, appends it to
//! the path basis, extends every subtree document's projection by one
//! coordinate and splits the documents at the median of the squared new
//! coordinate. A node's envelope (`min_proj_sq`, `max_proj_sq`) is recorded
//! when the node is created, i.e. against the basis of its ancestors' pivots;
//! the root therefore always stores `0/0`.

use alloc::vec::Vec;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::basis::{Basis, ExtensionRecord, ProjState};
use crate::error::{Error, Result};
use crate::vecspace::{Corpus, SparseVector};

/// How candidate pivots are scored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PivotScore {
    /// Σ over subtree documents of the squared coordinate on the candidate's
    /// orthogonalized direction: the gain in `Σ ‖Bᵀd‖²`.
    #[default]
    TraceGain,
    /// Σ (pᵀd)² / ‖p‖², ignoring the existing basis.
    RawProjection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BuildConfig {
    pub leaf_capacity: usize,
    pub candidate_count: usize,
    pub rng_seed: u64,
    pub max_depth: usize,
    pub score: PivotScore,
}

impl Default for BuildConfig {
    fn default() -> Self {
        Self { leaf_capacity: 32, candidate_count: 10, rng_seed: 0, max_depth: 64, score: PivotScore::TraceGain }
    }
}

impl BuildConfig {
    pub fn validate(&self) -> Result<()> {
        if self.leaf_capacity == 0 {
            return Err(Error::InvalidConfig("leaf capacity must be at least 1"));
        }
        if self.candidate_count == 0 {
            return Err(Error::InvalidConfig("candidate count must be at least 1"));
        }
        if self.max_depth == 0 {
            return Err(Error::InvalidConfig("max depth must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum NodeKind {
    Internal {
        /// Corpus position of the pivot document.
        pivot: usize,
        ext: ExtensionRecord,
        /// Documents with squared new coordinate above this went left.
        split_threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        docs: Vec<usize>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PivotNode {
    pub min_proj_sq: f64,
    pub max_proj_sq: f64,
    /// Number of documents in the subtree.
    pub size: usize,
    /// Number of ancestors, which is also the depth of the envelope's basis.
    pub depth: usize,
    pub kind: NodeKind,
}

impl PivotNode {
    pub fn is_leaf(&self) -> bool {
        matches!(self.kind, NodeKind::Leaf { .. })
    }

    pub fn children(&self) -> Option<(usize, usize)> {
        match self.kind {
            NodeKind::Internal { left, right, .. } => Some((left, right)),
            NodeKind::Leaf { .. } => None,
        }
    }
}

/// A built index. Nodes are stored in pre-order; `nodes[0]` is the root.
#[derive(Debug, Clone, PartialEq)]
pub struct PivotTree {
    pub dim: usize,
    pub n_docs: usize,
    pub config: BuildConfig,
    pub nodes: Vec<PivotNode>,
}

impl PivotTree {
    /// Reassembles a tree from pre-order nodes, checking structure and the
    /// leaf partition.
    pub fn from_parts(dim: usize, n_docs: usize, config: BuildConfig, nodes: Vec<PivotNode>) -> Result<Self> {
        let tree = Self { dim, n_docs, config, nodes };
        tree.check_structure()?;
        Ok(tree)
    }

    fn check_structure(&self) -> Result<()> {
        if self.nodes.is_empty() {
            return Err(Error::InvalidConfig("tree has no nodes"));
        }
        let mut seen = alloc::vec![false; self.n_docs];
        let mut next = 0usize;
        self.check_subtree(0, 0, &mut next, &mut seen)?;
        if next != self.nodes.len() || seen.iter().any(|s| !s) {
            return Err(Error::InvalidConfig("tree leaves do not partition the corpus"));
        }
        Ok(())
    }

    fn check_subtree(&self, idx: usize, depth: usize, next: &mut usize, seen: &mut [bool]) -> Result<usize> {
        if idx != *next || idx >= self.nodes.len() {
            return Err(Error::InvalidConfig("tree nodes are not in pre-order"));
        }
        *next += 1;
        let node = &self.nodes[idx];
        if node.depth != depth || node.min_proj_sq.partial_cmp(&node.max_proj_sq).is_none_or(|o| o.is_gt()) {
            return Err(Error::InvalidConfig("inconsistent node statistics"));
        }
        let size = match &node.kind {
            NodeKind::Leaf { docs } => {
                for &d in docs {
                    if d >= seen.len() || seen[d] {
                        return Err(Error::InvalidConfig("tree leaves do not partition the corpus"));
                    }
                    seen[d] = true;
                }
                docs.len()
            }
            NodeKind::Internal { pivot, ext, left, right, .. } => {
                if *pivot >= self.n_docs || ext.w.len() != depth || ext.pivot_dots.len() != depth {
                    return Err(Error::InvalidConfig("inconsistent internal node"));
                }
                self.check_subtree(*left, depth + 1, next, seen)? + self.check_subtree(*right, depth + 1, next, seen)?
            }
        };
        if size != node.size {
            return Err(Error::InvalidConfig("node size differs from its subtree"));
        }
        Ok(size)
    }

    pub fn root(&self) -> &PivotNode {
        &self.nodes[0]
    }

    pub fn node(&self, idx: usize) -> &PivotNode {
        &self.nodes[idx]
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.is_leaf()).count()
    }

    /// Depth of the deepest node (root is 0).
    pub fn height(&self) -> usize {
        self.nodes.iter().map(|n| n.depth).max().unwrap_or(0)
    }

    /// All documents under `idx`, in leaf order.
    pub fn subtree_docs(&self, idx: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.nodes[idx].size);
        let mut stack = alloc::vec![idx];
        while let Some(i) = stack.pop() {
            match &self.nodes[i].kind {
                NodeKind::Leaf { docs } => out.extend_from_slice(docs),
                NodeKind::Internal { left, right, .. } => {
                    stack.push(*right);
                    stack.push(*left);
                }
            }
        }
        out
    }

    /// Pivot documents on the path from the root to `idx`, root first.
    pub fn path_pivots(&self, idx: usize) -> Vec<usize> {
        let mut path = Vec::new();
        let mut cur = 0;
        while cur != idx {
            match &self.nodes[cur].kind {
                NodeKind::Internal { pivot, right, left, .. } => {
                    path.push(*pivot);
                    // Pre-order: the right subtree starts after the whole left one.
                    cur = if idx >= *right { *right } else { *left };
                }
                NodeKind::Leaf { .. } => break,
            }
        }
        path
    }
}

/// Squared coordinate each document would get on `p`'s orthogonalized direction.
fn new_coords(
    corpus: &Corpus,
    docs: &[usize],
    states: &[ProjState],
    rec: &ExtensionRecord,
    p: &SparseVector,
) -> Vec<f64> {
    docs.iter().map(|&d| rec.coordinate(corpus.vector(d).dot_unchecked(p), &states[d].pivot_dots)).collect()
}

/// Trace gain of appending `p`: `Σ_d (xᵀd)²` over `docs`.
pub fn trace_gain(
    corpus: &Corpus,
    docs: &[usize],
    states: &[ProjState],
    rec: &ExtensionRecord,
    p: &SparseVector,
) -> f64 {
    new_coords(corpus, docs, states, rec, p).iter().map(|c| c * c).sum()
}

/// Samples up to `candidate_count` subtree documents and returns the one with
/// the highest score, together with its extension record. `states` is indexed
/// by corpus position and must be current for `basis`.
pub fn select_pivot<R: rand::Rng + ?Sized>(
    corpus: &Corpus,
    docs: &[usize],
    states: &[ProjState],
    basis: &Basis,
    cfg: &BuildConfig,
    rng: &mut R,
) -> Result<(usize, ExtensionRecord)> {
    if docs.is_empty() {
        return Err(Error::InvalidConfig("cannot select a pivot from an empty set"));
    }
    let m = cfg.candidate_count.min(docs.len());
    let mut best: Option<(f64, usize, ExtensionRecord)> = None;
    let mut last_residual = 0.0;
    for pos in index::sample(rng, docs.len(), m) {
        let cand = docs[pos];
        let p = corpus.vector(cand);
        let rec = match basis.extension_record(p, states[cand].pivot_dots.clone()) {
            Ok(rec) => rec,
            Err(Error::DegeneratePivot(r)) => {
                last_residual = r;
                continue;
            }
            Err(e) => return Err(e),
        };
        let score = match cfg.score {
            PivotScore::TraceGain => trace_gain(corpus, docs, states, &rec, p),
            PivotScore::RawProjection => {
                let n2 = p.norm_sq();
                docs.iter()
                    .map(|&d| {
                        let t = corpus.vector(d).dot_unchecked(p);
                        t * t
                    })
                    .sum::<f64>()
                    / n2
            }
        };
        let better = match &best {
            None => true,
            Some((s, idx, _)) => score > *s || (score == *s && cand < *idx),
        };
        if better {
            best = Some((score, cand, rec));
        }
    }
    best.map(|(_, cand, rec)| (cand, rec)).ok_or(Error::DegeneratePivot(last_residual))
}

/// Splits at the median of the squared new coordinates: strictly above goes
/// to the first set. Returns `(above, rest, threshold)`.
pub fn make_split(docs: &[(usize, f64)]) -> Result<(Vec<usize>, Vec<usize>, f64)> {
    if docs.len() < 2 {
        return Err(Error::UnsplittableNode);
    }
    let mut sorted: Vec<f64> = docs.iter().map(|&(_, v)| v).collect();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let (lo, hi) = (sorted[0], sorted[sorted.len() - 1]);
    if lo == hi {
        return Err(Error::UnsplittableNode);
    }
    let n = sorted.len();
    let mut c = if n % 2 == 1 { sorted[n / 2] } else { (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0 };
    if c >= hi {
        // Ties at the top: peel off the maximal values.
        c = sorted.iter().rev().copied().find(|&v| v < hi).unwrap_or(lo);
    }
    let (above, rest): (Vec<_>, Vec<_>) = docs.iter().partition(|&&(_, v)| v > c);
    Ok((above.into_iter().map(|(d, _)| d).collect(), rest.into_iter().map(|(d, _)| d).collect(), c))
}

/// Appends the coordinate for `p`'s direction to each document's state.
pub fn update_projections(
    corpus: &Corpus,
    docs: &[usize],
    states: &mut [ProjState],
    rec: &ExtensionRecord,
    p: &SparseVector,
) {
    for &d in docs {
        states[d].update(corpus.vector(d), rec, p);
    }
}

pub fn build_tree(corpus: &Corpus, cfg: &BuildConfig) -> Result<PivotTree> {
    cfg.validate()?;
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut builder = Builder {
        corpus,
        cfg,
        rng: ChaCha8Rng::seed_from_u64(cfg.rng_seed),
        states: alloc::vec![ProjState::new(); corpus.len()],
        nodes: Vec::new(),
    };
    let all: Vec<usize> = (0..corpus.len()).collect();
    builder.build(all, &Basis::empty(corpus.dim()), 0)?;
    Ok(PivotTree { dim: corpus.dim(), n_docs: corpus.len(), config: *cfg, nodes: builder.nodes })
}

struct Builder<'a> {
    corpus: &'a Corpus,
    cfg: &'a BuildConfig,
    rng: ChaCha8Rng,
    states: Vec<ProjState>,
    nodes: Vec<PivotNode>,
}

impl Builder<'_> {
    fn build(&mut self, docs: Vec<usize>, basis: &Basis, depth: usize) -> Result<usize> {
        let (mut min, mut max) = (f64::INFINITY, f64::NEG_INFINITY);
        for &d in &docs {
            let v = self.states[d].proj_norm_sq;
            min = min.min(v);
            max = max.max(v);
        }
        let idx = self.nodes.len();
        let size = docs.len();
        self.nodes.push(PivotNode {
            min_proj_sq: min,
            max_proj_sq: max,
            size,
            depth,
            kind: NodeKind::Leaf { docs: Vec::new() },
        });

        if size <= self.cfg.leaf_capacity || depth >= self.cfg.max_depth {
            self.nodes[idx].kind = NodeKind::Leaf { docs };
            return Ok(idx);
        }
        let (pivot, rec) = match select_pivot(self.corpus, &docs, &self.states, basis, self.cfg, &mut self.rng) {
            Ok(found) => found,
            Err(Error::DegeneratePivot(_)) => {
                self.nodes[idx].kind = NodeKind::Leaf { docs };
                return Ok(idx);
            }
            Err(e) => return Err(e),
        };
        let p = self.corpus.vector(pivot);
        update_projections(self.corpus, &docs, &mut self.states, &rec, p);
        let keyed: Vec<(usize, f64)> = docs
            .iter()
            .map(|&d| {
                let c = self.states[d].last_coord().unwrap_or(0.0);
                (d, c * c)
            })
            .collect();
        let (left_docs, right_docs, threshold) = match make_split(&keyed) {
            Ok(split) => split,
            Err(Error::UnsplittableNode) => {
                self.nodes[idx].kind = NodeKind::Leaf { docs };
                return Ok(idx);
            }
            Err(e) => return Err(e),
        };
        let (child_basis, _) = basis.extend_with_dots(p, rec.pivot_dots.clone())?;
        let left = self.build(left_docs, &child_basis, depth + 1)?;
        let right = self.build(right_docs, &child_basis, depth + 1)?;
        self.nodes[idx].kind = NodeKind::Internal { pivot, ext: rec, split_threshold: threshold, left, right };
        Ok(idx)
    }
}
