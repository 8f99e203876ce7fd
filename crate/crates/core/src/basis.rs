//! Incremental orthonormal basis over the pivots on a root-to-node path.
//!
//! The basis is kept in factored form `B = P·A`, where `P` holds the raw pivot
//! vectors as columns and `A` is upper-triangular. Appending a pivot `p` adds
//! the column `(-α·w, α)` to `A` with `w = A·Aᵀ·Pᵀp` and `α = 1/‖y‖`, where
//! `y = p - B·Bᵀp` is the residual of `p` against the current span. `y` itself
//! is never formed: every coordinate against the new direction is obtained as
//! `α·(dᵀp - wᵀ·Pᵀd)` from cached pivot dots, so extending a document's
//! projection costs one sparse dot plus O(depth).

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::vecspace::SparseVector;

/// Residuals at or below this are treated as lying inside the span.
pub const SPAN_EPSILON: f64 = 1e-7;

/// Negative residuals down to this value are rounding and get clamped to zero.
pub const DRIFT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Basis {
    dim: usize,
    pivots: Vec<SparseVector>,
    // coeff[j] is column j of A, holding rows 0..=j.
    coeff: Vec<Vec<f64>>,
}

/// What a single extension contributes, enough to extend any vector's
/// projection state without touching the basis again.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtensionRecord {
    /// `1/‖y‖`.
    pub alpha: f64,
    /// `A·Aᵀ·Pᵀp`, one entry per pre-existing pivot.
    pub w: Vec<f64>,
    /// `Pᵀp`, the new pivot's dots with the pre-existing pivots.
    pub pivot_dots: Vec<f64>,
}

impl ExtensionRecord {
    /// Coordinate of a vector on the new direction, given its dot with the new
    /// pivot and its dots with the previous pivots.
    pub fn coordinate(&self, pivot_dot: f64, prior_pivot_dots: &[f64]) -> f64 {
        debug_assert_eq!(prior_pivot_dots.len(), self.w.len());
        let shadow: f64 = self.w.iter().zip(prior_pivot_dots).map(|(w, d)| w * d).sum();
        self.alpha * (pivot_dot - shadow)
    }

    pub fn depth(&self) -> usize {
        self.w.len()
    }
}

/// Per-vector projection coordinates along one pivot path.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ProjState {
    /// Coordinate on each orthonormal direction, in path order.
    pub coords: Vec<f64>,
    /// Running `‖Bᵀd‖²`.
    pub proj_norm_sq: f64,
    /// `Pᵀd`.
    pub pivot_dots: Vec<f64>,
}

impl ProjState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn depth(&self) -> usize {
        self.coords.len()
    }

    /// Appends the coordinate on the direction described by `rec`.
    pub fn update(&mut self, d: &SparseVector, rec: &ExtensionRecord, p: &SparseVector) {
        let pivot_dot = d.dot_unchecked(p);
        let c = rec.coordinate(pivot_dot, &self.pivot_dots);
        self.push(pivot_dot, c);
    }

    pub fn push(&mut self, pivot_dot: f64, coord: f64) {
        self.pivot_dots.push(pivot_dot);
        self.coords.push(coord);
        self.proj_norm_sq += coord * coord;
    }

    /// Drops every level past `depth`, recomputing the running norm.
    pub fn truncate(&mut self, depth: usize) {
        if depth < self.coords.len() {
            self.coords.truncate(depth);
            self.pivot_dots.truncate(depth);
            self.proj_norm_sq = self.coords.iter().map(|c| c * c).sum();
        }
    }

    pub fn last_coord(&self) -> Option<f64> {
        self.coords.last().copied()
    }
}

/// Functional form of [`ProjState::update`].
pub fn update_proj(state: &ProjState, d: &SparseVector, rec: &ExtensionRecord, p: &SparseVector) -> ProjState {
    let mut next = state.clone();
    next.update(d, rec, p);
    next
}

/// Row-major dense matrix, used to check the factored basis.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    /// `selfᵀ·self`.
    pub fn gram(&self) -> DenseMatrix {
        let mut g = DenseMatrix::zeros(self.cols, self.cols);
        for r in 0..self.rows {
            let row = &self.data[r * self.cols..(r + 1) * self.cols];
            if row.iter().all(|&x| x == 0.0) {
                continue;
            }
            for i in 0..self.cols {
                for j in 0..self.cols {
                    g.data[i * self.cols + j] += row[i] * row[j];
                }
            }
        }
        g
    }

    /// Largest `|selfᵢⱼ - δᵢⱼ|`.
    pub fn max_identity_deviation(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((self.get(i, j) - target).abs());
            }
        }
        worst
    }
}

impl Basis {
    pub fn empty(dim: usize) -> Self {
        Self { dim, pivots: Vec::new(), coeff: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn depth(&self) -> usize {
        self.pivots.len()
    }

    pub fn pivots(&self) -> &[SparseVector] {
        &self.pivots
    }

    /// Entry `(row, col)` of the upper-triangular factor `A`.
    pub fn coeff(&self, row: usize, col: usize) -> f64 {
        if row > col {
            0.0
        } else {
            self.coeff[col][row]
        }
    }

    /// `Pᵀv`.
    pub fn pivot_dots(&self, v: &SparseVector) -> Result<Vec<f64>> {
        self.pivots.iter().map(|p| p.dot(v)).collect()
    }

    /// Orthonormal coordinates `Aᵀ·(Pᵀv)` from precomputed pivot dots.
    pub fn coords_from_dots(&self, pivot_dots: &[f64]) -> Vec<f64> {
        self.coeff.iter().map(|col| col.iter().zip(pivot_dots).map(|(a, d)| a * d).sum()).collect()
    }

    /// Projection state of `v` against the whole basis, computed from scratch.
    pub fn project(&self, v: &SparseVector) -> Result<ProjState> {
        let pivot_dots = self.pivot_dots(v)?;
        let coords = self.coords_from_dots(&pivot_dots);
        let proj_norm_sq = coords.iter().map(|c| c * c).sum();
        Ok(ProjState { coords, proj_norm_sq, pivot_dots })
    }

    /// `‖p‖² - ‖Bᵀp‖²`, the squared norm of `p`'s residual against the span.
    pub fn residual_norm_sq(&self, p: &SparseVector, pivot_dots: &[f64]) -> Result<f64> {
        if pivot_dots.len() != self.depth() {
            return Err(Error::DimensionMismatch { left: pivot_dots.len(), right: self.depth() });
        }
        let in_span: f64 = self.coords_from_dots(pivot_dots).iter().map(|c| c * c).sum();
        let r = p.norm_sq() - in_span;
        if r >= 0.0 {
            Ok(r)
        } else if r >= -DRIFT_TOLERANCE {
            Ok(0.0)
        } else {
            Err(Error::NumericalDrift(r))
        }
    }

    /// Appends `p`, computing its pivot dots first.
    pub fn extend(&self, p: &SparseVector) -> Result<(Basis, ExtensionRecord)> {
        let dots = self.pivot_dots(p)?;
        self.extend_with_dots(p, dots)
    }

    /// Appends `p` given `Pᵀp`. Fails with [`Error::DegeneratePivot`] when `p`
    /// lies (numerically) inside the current span.
    pub fn extend_with_dots(&self, p: &SparseVector, pivot_dots: Vec<f64>) -> Result<(Basis, ExtensionRecord)> {
        if p.dim() != self.dim {
            return Err(Error::DimensionMismatch { left: p.dim(), right: self.dim });
        }
        let rec = self.extension_record(p, pivot_dots)?;
        let mut column: Vec<f64> = rec.w.iter().map(|w| -rec.alpha * w).collect();
        column.push(rec.alpha);
        let mut next = self.clone();
        next.pivots.push(p.clone());
        next.coeff.push(column);
        Ok((next, rec))
    }

    /// The record `extend_with_dots` would produce, without building the new basis.
    pub fn extension_record(&self, p: &SparseVector, pivot_dots: Vec<f64>) -> Result<ExtensionRecord> {
        let residual = self.residual_norm_sq(p, &pivot_dots)?;
        if residual <= SPAN_EPSILON {
            return Err(Error::DegeneratePivot(residual));
        }
        let alpha = 1.0 / libm::sqrt(residual);
        let u = self.coords_from_dots(&pivot_dots);
        // w = A·u with A upper-triangular.
        let n = self.depth();
        let mut w = vec![0.0; n];
        for (j, col) in self.coeff.iter().enumerate() {
            for (i, a) in col.iter().enumerate() {
                w[i] += a * u[j];
            }
        }
        Ok(ExtensionRecord { alpha, w, pivot_dots })
    }

    /// Dense `dim × depth` matrix `P·A`.
    pub fn materialize(&self) -> DenseMatrix {
        let n = self.depth();
        let mut m = DenseMatrix::zeros(self.dim, n);
        for (j, col) in self.coeff.iter().enumerate() {
            for (i, a) in col.iter().enumerate() {
                for (t, v) in self.pivots[i].iter() {
                    m.data[t as usize * n + j] += a * v;
                }
            }
        }
        m
    }
}
