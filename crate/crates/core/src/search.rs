//! Top-k branch-and-bound search over a [`PivotTree`].
//!
//! The query carries its own projection state down the tree. At an internal
//! node the query's coordinate on the node's pivot direction is appended, and
//! both children are bounded against their stored envelopes. The child with
//! the higher bound is searched first; the sibling is then re-tested against
//! the (possibly improved) k-th best similarity before it is entered.

use alloc::vec::Vec;

use crate::basis::{ExtensionRecord, ProjState};
use crate::error::{Error, Result};
use crate::tree::{NodeKind, PivotNode, PivotTree};
use crate::vecspace::{Corpus, SparseVector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hit {
    pub doc: usize,
    pub similarity: f64,
}

/// The `k` best `(similarity, doc)` pairs seen so far, best first. Ties in
/// similarity favour the lower document index.
#[derive(Debug, Clone)]
pub struct TopKQueue {
    capacity: usize,
    items: Vec<Hit>,
}

impl TopKQueue {
    pub fn new(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidK);
        }
        Ok(Self { capacity: k, items: Vec::with_capacity(k.min(1024) + 1) })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.items.len() == self.capacity
    }

    /// Similarity of the worst kept item once full, `-∞` before that.
    pub fn kth_value(&self) -> f64 {
        if self.is_full() {
            self.items[self.items.len() - 1].similarity
        } else {
            f64::NEG_INFINITY
        }
    }

    /// Offers a candidate; returns whether it was kept.
    pub fn insert(&mut self, doc: usize, similarity: f64) -> bool {
        let ahead = |h: &Hit| h.similarity > similarity || (h.similarity == similarity && h.doc < doc);
        let pos = self.items.partition_point(ahead);
        if pos >= self.capacity {
            return false;
        }
        self.items.insert(pos, Hit { doc, similarity });
        self.items.truncate(self.capacity);
        true
    }

    pub fn items(&self) -> &[Hit] {
        &self.items
    }

    pub fn into_sorted_vec(self) -> Vec<Hit> {
        self.items
    }
}

/// Which bound formula to use, plus the tightening multiplier `gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BoundKind {
    /// `a·√max + √(1-a²)·√(1-min)`: Cauchy–Schwarz on the span and its
    /// complement, relaxed with the node envelope. Admissible at `gamma = 1`.
    #[default]
    Safe,
    /// `1 + 2·a·√max - a - √min`. Empirical, not guaranteed to dominate.
    Heuristic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundVariant {
    pub kind: BoundKind,
    pub gamma: f64,
}

impl BoundVariant {
    pub fn new(kind: BoundKind, gamma: f64) -> Result<Self> {
        let v = Self { kind, gamma };
        v.validate()?;
        Ok(v)
    }

    pub fn safe() -> Self {
        Self { kind: BoundKind::Safe, gamma: 1.0 }
    }

    pub fn heuristic() -> Self {
        Self { kind: BoundKind::Heuristic, gamma: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.gamma > 0.0 && self.gamma <= 1.0 {
            Ok(())
        } else {
            Err(Error::InvalidGamma(self.gamma))
        }
    }
}

/// Query projection state along the current descent path.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct QueryState {
    pub proj: ProjState,
}

impl QueryState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn proj_norm_sq(&self) -> f64 {
        self.proj.proj_norm_sq
    }

    pub fn depth(&self) -> usize {
        self.proj.depth()
    }

    /// Appends the query's coordinate on the direction added at an internal
    /// node, given that node's extension record and pivot vector.
    pub fn descend(&mut self, ext: &ExtensionRecord, pivot: &SparseVector, q: &SparseVector) {
        self.proj.update(q, ext, pivot);
    }
}

/// Applies [`QueryState::descend`] for an internal node.
pub fn query_descend_update(qs: &QueryState, node: &PivotNode, corpus: &Corpus, q: &SparseVector) -> QueryState {
    let mut next = qs.clone();
    if let NodeKind::Internal { pivot, ext, .. } = &node.kind {
        next.descend(ext, corpus.vector(*pivot), q);
    }
    next
}

fn clamp_unit(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

/// Upper bound (at `gamma = 1`, safe kind) on `qᵀd` for every document in
/// `node`'s subtree. `query_proj_norm_sq` must be measured against the same
/// basis as the node's envelope.
pub fn envelope_bound(min_proj_sq: f64, max_proj_sq: f64, query_proj_norm_sq: f64, variant: BoundVariant) -> f64 {
    let a2 = clamp_unit(query_proj_norm_sq);
    let a = libm::sqrt(a2);
    let raw = match variant.kind {
        BoundKind::Safe => {
            a * libm::sqrt(clamp_unit(max_proj_sq)) + libm::sqrt(1.0 - a2) * libm::sqrt(1.0 - clamp_unit(min_proj_sq))
        }
        BoundKind::Heuristic => {
            1.0 + 2.0 * a * libm::sqrt(clamp_unit(max_proj_sq)) - a - libm::sqrt(clamp_unit(min_proj_sq))
        }
    };
    variant.gamma * raw
}

pub fn compute_bound(node: &PivotNode, qs: &QueryState, variant: BoundVariant) -> f64 {
    envelope_bound(node.min_proj_sq, node.max_proj_sq, qs.proj_norm_sq(), variant)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SearchStats {
    /// Documents scored exactly at leaves.
    pub scored: usize,
    /// Documents inside subtrees skipped by the bound test.
    pub pruned_docs: usize,
    pub visited_nodes: usize,
    pub pruned_nodes: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    pub hits: Vec<Hit>,
    pub stats: SearchStats,
}

pub fn search_tree(
    tree: &PivotTree,
    corpus: &Corpus,
    q: &SparseVector,
    k: usize,
    variant: BoundVariant,
) -> Result<SearchOutcome> {
    if q.dim() != tree.dim {
        return Err(Error::DimensionMismatch { left: q.dim(), right: tree.dim });
    }
    if corpus.len() != tree.n_docs || corpus.dim() != tree.dim {
        return Err(Error::InvalidConfig("corpus does not match the index"));
    }
    variant.validate()?;
    let mut search = Search {
        tree,
        corpus,
        q,
        variant,
        queue: TopKQueue::new(k)?,
        qs: QueryState::new(),
        stats: SearchStats::default(),
    };
    search.visit(0);
    Ok(SearchOutcome { hits: search.queue.into_sorted_vec(), stats: search.stats })
}

struct Search<'a> {
    tree: &'a PivotTree,
    corpus: &'a Corpus,
    q: &'a SparseVector,
    variant: BoundVariant,
    queue: TopKQueue,
    qs: QueryState,
    stats: SearchStats,
}

impl Search<'_> {
    fn visit(&mut self, idx: usize) {
        self.stats.visited_nodes += 1;
        let node = &self.tree.nodes[idx];
        match &node.kind {
            NodeKind::Leaf { docs } => {
                for &d in docs {
                    let s = self.corpus.vector(d).dot_unchecked(self.q);
                    self.queue.insert(d, s);
                }
                self.stats.scored += docs.len();
            }
            NodeKind::Internal { pivot, ext, left, right, .. } => {
                let depth = self.qs.depth();
                self.qs.descend(ext, self.corpus.vector(*pivot), self.q);
                let bl = compute_bound(&self.tree.nodes[*left], &self.qs, self.variant);
                let br = compute_bound(&self.tree.nodes[*right], &self.qs, self.variant);
                let order = if bl >= br { [(*left, bl), (*right, br)] } else { [(*right, br), (*left, bl)] };
                for (child, bound) in order {
                    if bound < self.queue.kth_value() {
                        self.stats.pruned_docs += self.tree.nodes[child].size;
                        self.stats.pruned_nodes += 1;
                    } else {
                        self.visit(child);
                    }
                }
                self.qs.proj.truncate(depth);
            }
        }
    }
}
