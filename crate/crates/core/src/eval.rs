//! Retrieval-quality metrics and the bound-tightening sweep.
//!
//! Every sweep cell searches one query with one method at one `gamma` and is
//! compared with the exhaustive top-k. Prune fractions count skipped
//! documents, not skipped nodes, so trees of different shape compare directly.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::baselines::{brute_force_topk, build_ball_tree, mip_search, BallTree};
use crate::error::{Error, Result};
use crate::search::{compute_bound, search_tree, BoundKind, BoundVariant, QueryState, SearchOutcome};
use crate::tree::{build_tree, BuildConfig, NodeKind, PivotTree};
use crate::vecspace::{Corpus, SparseVector};

/// `|retrieved ∩ truth| / |truth|`.
pub fn precision_at_k<T: Ord>(retrieved: &[T], truth: &[T]) -> Result<f64> {
    if truth.is_empty() {
        return Err(Error::EmptyTruth);
    }
    let truth_set: BTreeMap<&T, ()> = truth.iter().map(|t| (t, ())).collect();
    let mut seen = BTreeMap::new();
    let hits = retrieved.iter().filter(|r| truth_set.contains_key(r) && seen.insert(*r, ()).is_none()).count();
    Ok(hits as f64 / truth.len() as f64)
}

/// Spearman footrule over the truth list: `Σ |rank_retrieved(t) - rank_truth(t)|`
/// with 1-based ranks; truth items missing from `retrieved` rank `k + 1`.
pub fn spearman_distance<T: Ord>(retrieved: &[T], truth: &[T]) -> Result<f64> {
    if truth.is_empty() {
        return Err(Error::EmptyTruth);
    }
    let got = ranks(retrieved)?;
    ranks(truth)?;
    let missing = truth.len() + 1;
    let total: usize =
        truth.iter().enumerate().map(|(i, t)| got.get(t).copied().unwrap_or(missing).abs_diff(i + 1)).sum();
    Ok(total as f64)
}

fn ranks<T: Ord>(list: &[T]) -> Result<BTreeMap<&T, usize>> {
    let mut m = BTreeMap::new();
    for (i, t) in list.iter().enumerate() {
        if m.insert(t, i + 1).is_some() {
            return Err(Error::DuplicateRankedId(i));
        }
    }
    Ok(m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Method {
    MtaSafe,
    MtaHeuristic,
    Mip,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::MtaSafe, Method::MtaHeuristic, Method::Mip];

    pub fn name(self) -> &'static str {
        match self {
            Method::MtaSafe => "MTA-safe",
            Method::MtaHeuristic => "MTA-heuristic",
            Method::Mip => "MIP",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.name().eq_ignore_ascii_case(s))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub k: usize,
    /// Tightening factors in (0, 1], non-increasing.
    pub gammas: Vec<f64>,
    pub methods: Vec<Method>,
    pub build: BuildConfig,
    pub ball_leaf_capacity: usize,
}

impl SweepConfig {
    pub fn new(k: usize, gammas: Vec<f64>) -> Self {
        Self {
            k,
            gammas,
            methods: Method::ALL.to_vec(),
            build: BuildConfig::default(),
            ball_leaf_capacity: BuildConfig::default().leaf_capacity,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidK);
        }
        if self.gammas.is_empty() {
            return Err(Error::InvalidConfig("at least one gamma is required"));
        }
        for &g in &self.gammas {
            BoundVariant::new(BoundKind::Safe, g)?;
        }
        if self.gammas.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::InvalidConfig("gammas must be in descending order"));
        }
        self.build.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalRow {
    pub method: Method,
    pub gamma: f64,
    pub query: usize,
    pub precision: f64,
    pub spearman: f64,
    pub prune_fraction: f64,
    pub scored: usize,
    pub pruned: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub method: Method,
    pub gamma: f64,
    pub queries: usize,
    pub mean_precision: f64,
    pub mean_spearman: f64,
    pub mean_prune_fraction: f64,
    pub mean_scored: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BoundAudit {
    /// (query, node) pairs examined.
    pub checked: usize,
    /// Pairs whose bound fell below the subtree's true best similarity.
    pub violations: usize,
    /// Largest `true max - bound` over all pairs (negative when all pairs held).
    pub worst_shortfall: f64,
}

impl BoundAudit {
    pub fn violation_rate(&self) -> f64 {
        if self.checked == 0 {
            0.0
        } else {
            self.violations as f64 / self.checked as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub n_docs: usize,
    pub k: usize,
    /// Ordered by method, then gamma (as given), then query.
    pub rows: Vec<EvalRow>,
    pub aggregates: Vec<Aggregate>,
    /// Fraction of (query, node) pairs where the heuristic bound under-estimates.
    pub heuristic_violation_rate: Option<f64>,
}

/// Builds the indexes once and searches every (method, gamma, query) cell.
pub fn run_sweep(corpus: &Corpus, queries: &[SparseVector], cfg: &SweepConfig) -> Result<EvalReport> {
    cfg.validate()?;
    let k = cfg.k.min(corpus.len());
    let needs_mta = cfg.methods.iter().any(|m| matches!(m, Method::MtaSafe | Method::MtaHeuristic));
    let pivot_tree = if needs_mta { Some(build_tree(corpus, &cfg.build)?) } else { None };
    let ball_tree: Option<BallTree> = if cfg.methods.contains(&Method::Mip) {
        Some(build_ball_tree(corpus, cfg.ball_leaf_capacity, cfg.build.rng_seed)?)
    } else {
        None
    };

    let truths: Vec<Vec<usize>> = queries
        .iter()
        .map(|q| Ok(brute_force_topk(corpus, q, k)?.into_iter().map(|h| h.doc).collect()))
        .collect::<Result<_>>()?;

    let n = corpus.len() as f64;
    let mut rows = Vec::with_capacity(cfg.methods.len() * cfg.gammas.len() * queries.len());
    let mut aggregates = Vec::with_capacity(cfg.methods.len() * cfg.gammas.len());
    for &method in &cfg.methods {
        for &gamma in &cfg.gammas {
            let first = rows.len();
            for (qi, q) in queries.iter().enumerate() {
                let out: SearchOutcome = match method {
                    Method::MtaSafe => search_tree(
                        pivot_tree.as_ref().unwrap(),
                        corpus,
                        q,
                        k,
                        BoundVariant::new(BoundKind::Safe, gamma)?,
                    )?,
                    Method::MtaHeuristic => search_tree(
                        pivot_tree.as_ref().unwrap(),
                        corpus,
                        q,
                        k,
                        BoundVariant::new(BoundKind::Heuristic, gamma)?,
                    )?,
                    Method::Mip => mip_search(
                        ball_tree.as_ref().unwrap(),
                        corpus,
                        q,
                        k,
                        BoundVariant::new(BoundKind::Safe, gamma)?,
                    )?,
                };
                let got: Vec<usize> = out.hits.iter().map(|h| h.doc).collect();
                rows.push(EvalRow {
                    method,
                    gamma,
                    query: qi,
                    precision: precision_at_k(&got, &truths[qi])?,
                    spearman: spearman_distance(&got, &truths[qi])?,
                    prune_fraction: out.stats.pruned_docs as f64 / n,
                    scored: out.stats.scored,
                    pruned: out.stats.pruned_docs,
                });
            }
            aggregates.push(aggregate(method, gamma, &rows[first..]));
        }
    }

    let heuristic_violation_rate = match &pivot_tree {
        Some(tree) if cfg.methods.contains(&Method::MtaHeuristic) => {
            Some(audit_heuristic_bound(corpus, queries, tree)?)
        }
        _ => None,
    };
    Ok(EvalReport { n_docs: corpus.len(), k, rows, aggregates, heuristic_violation_rate })
}

fn aggregate(method: Method, gamma: f64, rows: &[EvalRow]) -> Aggregate {
    let m = rows.len().max(1) as f64;
    let mean = |f: fn(&EvalRow) -> f64| rows.iter().map(f).sum::<f64>() / m;
    Aggregate {
        method,
        gamma,
        queries: rows.len(),
        mean_precision: mean(|r| r.precision),
        mean_spearman: mean(|r| r.spearman),
        mean_prune_fraction: mean(|r| r.prune_fraction),
        mean_scored: mean(|r| r.scored as f64),
    }
}

/// Checks `variant`'s bound against the true subtree maximum at every
/// non-root node, for every query. A pair counts as a violation when
/// `bound < true_max - tolerance`.
pub fn audit_bounds(
    corpus: &Corpus,
    queries: &[SparseVector],
    tree: &PivotTree,
    variant: BoundVariant,
    tolerance: f64,
) -> Result<BoundAudit> {
    variant.validate()?;
    let mut audit = BoundAudit { worst_shortfall: f64::NEG_INFINITY, ..BoundAudit::default() };
    let mut subtree_max = vec![f64::NEG_INFINITY; tree.nodes.len()];
    for q in queries {
        if q.dim() != tree.dim {
            return Err(Error::DimensionMismatch { left: q.dim(), right: tree.dim });
        }
        // Pre-order storage: children always follow their parent.
        for idx in (0..tree.nodes.len()).rev() {
            subtree_max[idx] = match &tree.nodes[idx].kind {
                NodeKind::Leaf { docs } => {
                    docs.iter().map(|&d| corpus.vector(d).dot_unchecked(q)).fold(f64::NEG_INFINITY, f64::max)
                }
                NodeKind::Internal { left, right, .. } => subtree_max[*left].max(subtree_max[*right]),
            };
        }
        let mut stack: Vec<(usize, QueryState)> = vec![(0, QueryState::new())];
        while let Some((idx, qs)) = stack.pop() {
            if let NodeKind::Internal { pivot, ext, left, right, .. } = &tree.nodes[idx].kind {
                let mut child_qs = qs;
                child_qs.descend(ext, corpus.vector(*pivot), q);
                for &child in &[*left, *right] {
                    let bound = compute_bound(&tree.nodes[child], &child_qs, variant);
                    let shortfall = subtree_max[child] - bound;
                    audit.checked += 1;
                    audit.worst_shortfall = audit.worst_shortfall.max(shortfall);
                    if shortfall > tolerance {
                        audit.violations += 1;
                    }
                    stack.push((child, child_qs.clone()));
                }
            }
        }
    }
    Ok(audit)
}

/// Fraction of (query, node) pairs where the heuristic bound at `gamma = 1`
/// falls strictly below the subtree's true best similarity.
pub fn audit_heuristic_bound(corpus: &Corpus, queries: &[SparseVector], tree: &PivotTree) -> Result<f64> {
    Ok(audit_bounds(corpus, queries, tree, BoundVariant::heuristic(), 0.0)?.violation_rate())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precision_examples() {
        assert_eq!(precision_at_k(&[1, 2, 3], &[1, 2, 3]).unwrap(), 1.0);
        assert_eq!(precision_at_k(&[4, 5], &[1, 2]).unwrap(), 0.0);
        let truth: Vec<u32> = (0..10).collect();
        let got: Vec<u32> = (5..15).collect();
        assert_eq!(precision_at_k(&got, &truth).unwrap(), 0.5);
        assert_eq!(precision_at_k::<u32>(&[1], &[]), Err(Error::EmptyTruth));
    }

    #[test]
    fn footrule_examples() {
        assert_eq!(spearman_distance(&["a", "b", "c"], &["a", "b", "c"]).unwrap(), 0.0);
        assert_eq!(spearman_distance(&["c", "b", "a"], &["a", "b", "c"]).unwrap(), 4.0);
        assert_eq!(spearman_distance(&["a", "c"], &["a", "b"]).unwrap(), 1.0);
        assert_eq!(spearman_distance(&["a", "a"], &["a", "b"]), Err(Error::DuplicateRankedId(1)));
        assert_eq!(spearman_distance(&["a"], &["b", "b"]), Err(Error::DuplicateRankedId(1)));
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(Method::from_name(m.name()), Some(m));
        }
        assert_eq!(Method::from_name("mip"), Some(Method::Mip));
        assert_eq!(Method::from_name("nope"), None);
    }

    #[test]
    fn sweep_config_rejects_ascending_gammas() {
        assert!(SweepConfig::new(3, vec![0.5, 1.0]).validate().is_err());
        assert!(SweepConfig::new(3, vec![1.0, 0.0]).validate().is_err());
        assert!(SweepConfig::new(0, vec![1.0]).validate().is_err());
        assert!(SweepConfig::new(3, vec![1.0, 1.0, 0.5]).validate().is_ok());
    }
}
