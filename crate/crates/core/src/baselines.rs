//! Exhaustive top-k scoring and the ball-tree inner-product comparator.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::search::{BoundVariant, Hit, SearchOutcome, SearchStats, TopKQueue};
use crate::vecspace::{Corpus, SparseVector};

/// Dimensions up to this accumulate centroids in a dense buffer.
const DENSE_CENTROID_MAX_DIM: usize = 1 << 16;

/// Exact top-k by `qᵀd`, descending, ties to the lower document index.
pub fn brute_force_topk(corpus: &Corpus, q: &SparseVector, k: usize) -> Result<Vec<Hit>> {
    if q.dim() != corpus.dim() {
        return Err(Error::DimensionMismatch { left: q.dim(), right: corpus.dim() });
    }
    let mut queue = TopKQueue::new(k)?;
    for (i, doc) in corpus.docs().iter().enumerate() {
        queue.insert(i, doc.vector.dot_unchecked(q));
    }
    Ok(queue.into_sorted_vec())
}

#[derive(Debug, Clone, PartialEq)]
pub enum BallKind {
    Internal { left: usize, right: usize },
    Leaf { docs: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct BallNode {
    /// Mean of the member documents (not normalized).
    pub centroid: SparseVector,
    /// Largest Euclidean distance from the centroid to a member.
    pub radius: f64,
    pub size: usize,
    pub kind: BallKind,
}

/// Binary ball tree; nodes in pre-order with the root at index 0.
#[derive(Debug, Clone, PartialEq)]
pub struct BallTree {
    pub dim: usize,
    pub n_docs: usize,
    pub leaf_capacity: usize,
    pub seed: u64,
    pub nodes: Vec<BallNode>,
}

impl BallTree {
    pub fn from_parts(
        dim: usize,
        n_docs: usize,
        leaf_capacity: usize,
        seed: u64,
        nodes: Vec<BallNode>,
    ) -> Result<Self> {
        let tree = Self { dim, n_docs, leaf_capacity, seed, nodes };
        let mut seen = vec![false; n_docs];
        let mut next = 0;
        if tree.nodes.is_empty() || tree.check(0, &mut next, &mut seen)? != n_docs || next != tree.nodes.len() {
            return Err(Error::InvalidConfig("ball tree leaves do not partition the corpus"));
        }
        Ok(tree)
    }

    fn check(&self, idx: usize, next: &mut usize, seen: &mut [bool]) -> Result<usize> {
        let bad = Error::InvalidConfig("malformed ball tree");
        if idx != *next || idx >= self.nodes.len() {
            return Err(bad);
        }
        *next += 1;
        let node = &self.nodes[idx];
        if node.centroid.dim() != self.dim || node.radius.is_nan() || node.radius < 0.0 {
            return Err(bad);
        }
        let size = match &node.kind {
            BallKind::Leaf { docs } => {
                for &d in docs {
                    if d >= seen.len() || seen[d] {
                        return Err(bad);
                    }
                    seen[d] = true;
                }
                docs.len()
            }
            BallKind::Internal { left, right } => self.check(*left, next, seen)? + self.check(*right, next, seen)?,
        };
        if size != node.size {
            return Err(bad);
        }
        Ok(size)
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n.kind, BallKind::Leaf { .. })).count()
    }

    pub fn subtree_docs(&self, idx: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![idx];
        while let Some(i) = stack.pop() {
            match &self.nodes[i].kind {
                BallKind::Leaf { docs } => out.extend_from_slice(docs),
                BallKind::Internal { left, right } => {
                    stack.push(*right);
                    stack.push(*left);
                }
            }
        }
        out
    }
}

fn centroid(corpus: &Corpus, docs: &[usize]) -> SparseVector {
    let dim = corpus.dim();
    let inv = 1.0 / docs.len() as f64;
    let entries: Vec<(u32, f64)> = if dim <= DENSE_CENTROID_MAX_DIM {
        let mut acc = vec![0.0; dim];
        for &d in docs {
            for (i, v) in corpus.vector(d).iter() {
                acc[i as usize] += v;
            }
        }
        acc.into_iter().enumerate().filter(|&(_, v)| v != 0.0).map(|(i, v)| (i as u32, v * inv)).collect()
    } else {
        let mut acc: BTreeMap<u32, f64> = BTreeMap::new();
        for &d in docs {
            for (i, v) in corpus.vector(d).iter() {
                *acc.entry(i).or_insert(0.0) += v;
            }
        }
        acc.into_iter().filter(|&(_, v)| v != 0.0).map(|(i, v)| (i, v * inv)).collect()
    };
    SparseVector::from_unsorted(dim, entries).expect("centroid of valid vectors is valid")
}

fn dist(a: &SparseVector, b: &SparseVector) -> f64 {
    libm::sqrt(a.dist_sq(b).expect("same corpus dimension"))
}

/// Index into `docs` of the member farthest from `from`; ties to the lowest
/// document index.
fn farthest(corpus: &Corpus, docs: &[usize], from: &SparseVector) -> (usize, f64) {
    let mut best = (docs[0], f64::NEG_INFINITY);
    for &d in docs {
        let r = dist(corpus.vector(d), from);
        if r > best.1 || (r == best.1 && d < best.0) {
            best = (d, r);
        }
    }
    best
}

/// Builds the ball tree. A node splits by taking the member farthest from the
/// mean, then the member farthest from that one, and sending every document
/// to the nearer of the two (ties to the first). The construction has no
/// random steps; `seed` is only recorded.
pub fn build_ball_tree(corpus: &Corpus, leaf_capacity: usize, seed: u64) -> Result<BallTree> {
    if leaf_capacity == 0 {
        return Err(Error::InvalidConfig("leaf capacity must be at least 1"));
    }
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut nodes = Vec::new();
    build_ball(corpus, (0..corpus.len()).collect(), leaf_capacity, &mut nodes);
    Ok(BallTree { dim: corpus.dim(), n_docs: corpus.len(), leaf_capacity, seed, nodes })
}

fn build_ball(corpus: &Corpus, docs: Vec<usize>, leaf_capacity: usize, nodes: &mut Vec<BallNode>) -> usize {
    let center = centroid(corpus, &docs);
    let (_, radius) = farthest(corpus, &docs, &center);
    let idx = nodes.len();
    let size = docs.len();
    nodes.push(BallNode { centroid: center, radius, size, kind: BallKind::Leaf { docs: Vec::new() } });
    if size <= leaf_capacity {
        nodes[idx].kind = BallKind::Leaf { docs };
        return idx;
    }
    let (a, _) = farthest(corpus, &docs, &nodes[idx].centroid);
    let (b, _) = farthest(corpus, &docs, corpus.vector(a));
    let (va, vb) = (corpus.vector(a), corpus.vector(b));
    let (left, right): (Vec<usize>, Vec<usize>) =
        docs.iter().partition(|&&d| dist(corpus.vector(d), va) <= dist(corpus.vector(d), vb));
    if left.is_empty() || right.is_empty() {
        nodes[idx].kind = BallKind::Leaf { docs };
        return idx;
    }
    let l = build_ball(corpus, left, leaf_capacity, nodes);
    let r = build_ball(corpus, right, leaf_capacity, nodes);
    nodes[idx].kind = BallKind::Internal { left: l, right: r };
    idx
}

/// `qᵀμ + r·‖q‖`, an upper bound on `qᵀd` for every member.
pub fn mip_bound(node: &BallNode, q: &SparseVector) -> f64 {
    node.centroid.dot_unchecked(q) + node.radius * libm::sqrt(q.norm_sq())
}

/// Same traversal and accounting as [`crate::search::search_tree`], driven by
/// [`mip_bound`]. Only `variant.gamma` is used.
pub fn mip_search(
    tree: &BallTree,
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
    let mut queue = TopKQueue::new(k)?;
    let mut stats = SearchStats::default();
    visit_ball(tree, corpus, q, variant.gamma, 0, &mut queue, &mut stats);
    Ok(SearchOutcome { hits: queue.into_sorted_vec(), stats })
}

fn visit_ball(
    tree: &BallTree,
    corpus: &Corpus,
    q: &SparseVector,
    gamma: f64,
    idx: usize,
    queue: &mut TopKQueue,
    stats: &mut SearchStats,
) {
    stats.visited_nodes += 1;
    match &tree.nodes[idx].kind {
        BallKind::Leaf { docs } => {
            for &d in docs {
                queue.insert(d, corpus.vector(d).dot_unchecked(q));
            }
            stats.scored += docs.len();
        }
        BallKind::Internal { left, right } => {
            let bl = gamma * mip_bound(&tree.nodes[*left], q);
            let br = gamma * mip_bound(&tree.nodes[*right], q);
            let order = if bl >= br { [(*left, bl), (*right, br)] } else { [(*right, br), (*left, bl)] };
            for (child, bound) in order {
                if bound < queue.kth_value() {
                    stats.pruned_docs += tree.nodes[child].size;
                    stats.pruned_nodes += 1;
                } else {
                    visit_ball(tree, corpus, q, gamma, child, queue, stats);
                }
            }
        }
    }
}
