mod common;

use common::{dense, gram_schmidt, oracle_proj_sq, oracle_residual_sq, random_unit, rng};
use pivotree_core::basis::update_proj;
use pivotree_core::{Basis, ProjState, SparseVector};
use rand::Rng;

/// Extends with random unit pivots, skipping ones inside the span.
fn random_path(r: &mut impl Rng, dim: usize, depth: usize, nnz: usize) -> Vec<(Basis, SparseVector)> {
    let mut out = Vec::new();
    let mut basis = Basis::empty(dim);
    while basis.depth() < depth {
        let p = random_unit(r, dim, nnz);
        if let Ok((next, _)) = basis.extend(&p) {
            out.push((basis, p));
            basis = next;
        }
    }
    out.push((basis, SparseVector::axis(dim, 0).unwrap()));
    out
}

#[test]
fn residual_matches_gram_schmidt_at_depth_five() {
    let mut r = rng(1);
    let path = random_path(&mut r, 60, 5, 12);
    let basis = &path.last().unwrap().0;
    let oracle = gram_schmidt(&basis.pivots().iter().map(dense).collect::<Vec<_>>());
    for _ in 0..50 {
        let p = random_unit(&mut r, 60, 12);
        let got = basis.residual_norm_sq(&p, &basis.pivot_dots(&p).unwrap()).unwrap();
        assert!((got - oracle_residual_sq(&oracle, &p)).abs() <= 1e-8);
    }
}

#[test]
fn twenty_pivots_stay_orthonormal() {
    let mut r = rng(2);
    let path = random_path(&mut r, 100, 20, 15);
    let basis = &path.last().unwrap().0;
    assert_eq!(basis.depth(), 20);
    assert!(basis.materialize().gram().max_identity_deviation() <= 1e-8);
}

#[test]
fn coefficient_factor_is_upper_triangular_with_positive_diagonal() {
    let mut r = rng(3);
    let basis = random_path(&mut r, 80, 12, 10).pop().unwrap().0;
    for j in 0..basis.depth() {
        assert!(basis.coeff(j, j) > 0.0);
        for i in j + 1..basis.depth() {
            assert_eq!(basis.coeff(i, j), 0.0);
        }
    }
}

#[test]
fn depth_eight_materialized_columns_are_orthonormal() {
    let mut r = rng(4);
    let basis = random_path(&mut r, 50, 8, 10).pop().unwrap().0;
    let m = basis.materialize();
    assert_eq!((m.rows, m.cols), (50, 8));
    assert!(m.gram().max_identity_deviation() <= 1e-8);
}

#[test]
fn recurrence_tracks_dense_projection_at_every_depth() {
    let mut r = rng(5);
    let dim = 200;
    let path = random_path(&mut r, dim, 10, 20);
    let docs: Vec<SparseVector> = (0..100).map(|_| random_unit(&mut r, dim, 25)).collect();
    let mut states = vec![ProjState::new(); docs.len()];
    let mut prev = vec![0.0; docs.len()];
    for (basis, p) in &path[..path.len() - 1] {
        let (next, rec) = basis.extend(p).unwrap();
        // Pythagoras at the moment of extension.
        let residual = basis.residual_norm_sq(p, &rec.pivot_dots).unwrap();
        let in_span = basis.project(p).unwrap().proj_norm_sq;
        assert!((residual + in_span - p.norm_sq()).abs() <= 1e-8);

        let oracle = gram_schmidt(&next.pivots().iter().map(dense).collect::<Vec<_>>());
        for (i, d) in docs.iter().enumerate() {
            states[i] = update_proj(&states[i], d, &rec, p);
            let s = &states[i];
            let expected = oracle_proj_sq(&oracle, d);
            assert!(
                (s.proj_norm_sq - expected).abs() <= 1e-8,
                "depth {}: {} vs {}",
                next.depth(),
                s.proj_norm_sq,
                expected
            );
            assert!((s.proj_norm_sq - s.coords.iter().map(|c| c * c).sum::<f64>()).abs() <= 1e-9);
            assert!(s.proj_norm_sq >= prev[i] - 1e-15, "projection shrank");
            assert!(s.proj_norm_sq <= d.norm_sq() + 1e-9, "Bessel bound");
            prev[i] = s.proj_norm_sq;
        }
    }
}

#[test]
fn orthonormality_holds_to_depth_twenty_five() {
    let mut r = rng(6);
    for trial in 0..5 {
        let basis = random_path(&mut r, 300, 25, 30).pop().unwrap().0;
        let dev = basis.materialize().gram().max_identity_deviation();
        assert!(dev <= 1e-8, "trial {trial}: deviation {dev:e}");
    }
}
