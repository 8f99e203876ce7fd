//! Test-only oracles: dense classical Gram–Schmidt and random sparse data.
#![allow(dead_code)]

use pivotree_core::{Corpus, SparseVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn dense(v: &SparseVector) -> Vec<f64> {
    let mut out = vec![0.0; v.dim()];
    for (i, w) in v.iter() {
        out[i as usize] = w;
    }
    out
}

pub fn dense_dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Orthonormal columns spanning `vectors`, by Gram–Schmidt with a second
/// re-orthogonalization pass.
pub fn gram_schmidt(vectors: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for v in vectors {
        let mut y = v.clone();
        for _ in 0..2 {
            for b in &basis {
                let c = dense_dot(&y, b);
                for (yi, bi) in y.iter_mut().zip(b) {
                    *yi -= c * bi;
                }
            }
        }
        let n = dense_dot(&y, &y).sqrt();
        assert!(n > 1e-9, "oracle received a dependent vector");
        basis.push(y.iter().map(|x| x / n).collect());
    }
    basis
}

/// `‖Bᵀd‖²` against an orthonormal dense basis.
pub fn oracle_proj_sq(basis: &[Vec<f64>], d: &SparseVector) -> f64 {
    basis
        .iter()
        .map(|b| {
            let c: f64 = d.iter().map(|(i, w)| w * b[i as usize]).sum();
            c * c
        })
        .sum()
}

pub fn oracle_residual_sq(basis: &[Vec<f64>], p: &SparseVector) -> f64 {
    p.norm_sq() - oracle_proj_sq(basis, p)
}

pub fn random_sparse(rng: &mut impl Rng, dim: usize, nnz: usize) -> SparseVector {
    let entries: Vec<(u32, f64)> =
        (0..nnz).map(|_| (rng.random_range(0..dim as u32), rng.random_range(-1.0..1.0))).collect();
    SparseVector::from_unsorted(dim, entries).unwrap()
}

pub fn random_unit(rng: &mut impl Rng, dim: usize, nnz: usize) -> SparseVector {
    loop {
        let v = random_sparse(rng, dim, nnz);
        if v.norm_sq() > 1e-6 {
            return v.normalize().unwrap();
        }
    }
}

/// Non-negative sparse documents whose terms lean toward a few topic blocks,
/// so that trees have something to separate.
pub fn topical_corpus(seed: u64, n: usize, dim: usize, nnz: usize) -> Corpus {
    let mut r = rng(seed);
    let topics = 8;
    let block = dim / topics;
    let raw: Vec<(String, Vec<(u32, f64)>)> = (0..n)
        .map(|i| {
            let topic = r.random_range(0..topics);
            let entries = (0..nnz)
                .map(|_| {
                    let t = if r.random_bool(0.7) {
                        (topic * block + r.random_range(0..block)) as u32
                    } else {
                        r.random_range(0..dim as u32)
                    };
                    (t, r.random_range(0.1..1.0))
                })
                .collect();
            (format!("d{i}"), entries)
        })
        .collect();
    Corpus::from_weighted(dim, raw).unwrap()
}

pub fn topical_queries(seed: u64, count: usize, dim: usize, nnz: usize) -> Vec<SparseVector> {
    let c = topical_corpus(seed, count, dim, nnz);
    c.docs().iter().map(|d| d.vector.clone()).collect()
}
