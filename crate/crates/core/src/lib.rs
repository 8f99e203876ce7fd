//! Pivot-tree indexing for top-k retrieval of unit-norm sparse vectors under
//! inner-product (cosine) similarity.
//!
//! The index descends a binary tree whose internal nodes each add one pivot
//! document to an incrementally orthonormalized path basis. Every node stores
//! the min/max squared projection norm of its documents onto that basis, which
//! is enough to bound `qᵀd` for the whole subtree and prune it during a
//! branch-and-bound search.
//!
//! Modules:
//!
//! - [`vecspace`]: sparse vectors, tf-idf weighting and the corpus model.
//! - [`basis`]: the `B = P·A` path basis and O(depth) projection updates.
//! - [`tree`]: offline index construction.
//! - [`search`]: bound evaluation and top-k branch-and-bound search.
//! - [`baselines`]: brute-force oracle and the ball-tree inner-product comparator.
//! - [`eval`]: precision, Spearman footrule and the tightening sweep harness.
//!
//! The crate is `no_std` and only needs `alloc`; file formats and the CLI live
//! in the companion `pivotree` crate.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod baselines;
pub mod basis;
mod error;
pub mod eval;
pub mod search;
pub mod tree;
pub mod vecspace;

pub use baselines::{brute_force_topk, build_ball_tree, mip_bound, mip_search, BallNode, BallTree};
pub use basis::{Basis, DenseMatrix, ExtensionRecord, ProjState};
pub use error::{Error, Result};
pub use eval::{
    audit_bounds, audit_heuristic_bound, precision_at_k, run_sweep, spearman_distance, Aggregate, BoundAudit,
    EvalReport, EvalRow, Method, SweepConfig,
};
pub use search::{
    compute_bound, search_tree, BoundKind, BoundVariant, Hit, QueryState, SearchOutcome, SearchStats, TopKQueue,
};
pub use tree::{build_tree, BuildConfig, NodeKind, PivotNode, PivotScore, PivotTree};
pub use vecspace::{Corpus, Document, SparseVector, Vocabulary};
