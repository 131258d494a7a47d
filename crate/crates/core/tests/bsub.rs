mod common;

use bdris::riscore::{index_sets, solve_b_subproblem, solve_b_subproblem_with, BSolvePath, DesignMatrix, MaskKind, Susceptance};
use common::{dense_b_oracle, mask_for, random_susceptance, rmat, KINDS};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

fn rel(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

fn instance(seed: u64, m: usize, k: usize, kind: MaskKind) -> (DMatrix<f64>, DMatrix<f64>, f64, Susceptance<f64>, bdris::riscore::ArchitectureMask) {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mask = mask_for(kind, m);
    let mm = rmat(&mut rng, m, 2 * k);
    let gm = rmat(&mut rng, m, 2 * k);
    let xi = 10f64.powf(rng.random_range(-3.0..0.0));
    let prev = random_susceptance(&mut rng, &mask, 1.0, 1.0);
    (mm, gm, xi, prev, mask)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn both_paths_match_dense_oracle(seed in any::<u64>(), m in 1usize..7, k in 1usize..4, kind in 0usize..4) {
        let (mm, gm, xi, prev, mask) = instance(seed, m, k, KINDS[kind]);
        let want = dense_b_oracle(&mm, &gm, xi, prev.matrix(), &mask);
        for path in [BSolvePath::Parameter, BSolvePath::RowSpace, BSolvePath::Auto] {
            let got = solve_b_subproblem_with(&mm, &gm, xi, &prev, &mask, path).unwrap();
            prop_assert!(rel(got.matrix(), &want) < 1e-8, "{:?}: {}", path, rel(got.matrix(), &want));
            prop_assert!(got.conforms_to(&mask));
            prop_assert_eq!(got.matrix(), &got.matrix().transpose());
        }
    }

    #[test]
    fn solution_is_stationary(seed in any::<u64>(), m in 1usize..7, k in 1usize..4, kind in 0usize..4) {
        // Directional derivative of the objective vanishes along every basis direction.
        let (mm, gm, xi, prev, mask) = instance(seed, m, k, KINDS[kind]);
        let b = solve_b_subproblem(&mm, &gm, xi, &prev, &mask).unwrap();
        let resid = b.matrix() * &mm - &gm;
        for (i, j) in common::free_positions(&mask) {
            let mut e = DMatrix::zeros(m, m);
            e[(i, j)] = 1.0;
            e[(j, i)] = 1.0;
            let g = 2.0 * (e * &mm).dot(&resid) + 2.0 * xi * (b.matrix()[(i, j)] - prev.matrix()[(i, j)]);
            prop_assert!(g.abs() < 1e-9 * (1.0 + gm.norm() * mm.norm()), "gradient {}", g);
        }
    }
}

#[test]
fn structured_products_match_dense_matrix() {
    let mut rng = ChaCha20Rng::seed_from_u64(5);
    for kind in KINDS {
        let mask = mask_for(kind, 8);
        let sets = index_sets(&mask);
        let mm = rmat(&mut rng, 8, 6);
        let a = DesignMatrix::new(&mm, &sets);
        let dense = a.to_dense();
        let x = DVector::from_fn(a.ncols(), |i, _| (i as f64 * 0.37).sin());
        let v = DVector::from_fn(a.nrows(), |i, _| (i as f64 * 0.11).cos());
        assert!((a.apply(&x) - &dense * &x).norm() < 1e-12);
        assert!((a.apply_transpose(&v) - dense.transpose() * &v).norm() < 1e-12);
        assert!((a.gram() - dense.transpose() * &dense).norm() < 1e-11);
        assert!((a.outer_gram() - &dense * dense.transpose()).norm() < 1e-11);
    }
}

#[test]
fn design_matrix_reproduces_bm() {
    // ‖Ax − vec(Γᵀ)‖ equals ‖BM − Γ‖_F for the packed B.
    let mut rng = ChaCha20Rng::seed_from_u64(9);
    let mask = mask_for(MaskKind::TreeTridiagonal, 6);
    let sets = index_sets(&mask);
    let b = random_susceptance(&mut rng, &mask, 1.0, 1.0);
    let mm = rmat(&mut rng, 6, 4);
    let gm = rmat(&mut rng, 6, 4);
    let a = DesignMatrix::new(&mm, &sets);
    let lhs = (a.apply(&b.pack(&sets)) - bdris::riscore::stack_rows(&gm)).norm();
    let rhs = (b.matrix() * &mm - &gm).norm();
    assert!((lhs - rhs).abs() < 1e-12);
}

#[test]
fn large_instance_paths_agree() {
    // P > 2MK for the fully-connected mask, P < 2MK for single.
    let mut rng = ChaCha20Rng::seed_from_u64(11);
    for kind in [MaskKind::Fully, MaskKind::Single, MaskKind::Group] {
        let mask = mask_for(kind, 32);
        let mm = rmat(&mut rng, 32, 8);
        let gm = rmat(&mut rng, 32, 8);
        let prev = random_susceptance(&mut rng, &mask, 1.0, 0.5);
        let p = solve_b_subproblem_with(&mm, &gm, 1e-3, &prev, &mask, BSolvePath::Parameter).unwrap();
        let r = solve_b_subproblem_with(&mm, &gm, 1e-3, &prev, &mask, BSolvePath::RowSpace).unwrap();
        assert!(rel(p.matrix(), r.matrix()) < 1e-8, "{kind:?}");
    }
}

#[test]
fn zero_multiplier_and_feasible_u_keep_zero_susceptance() {
    // With λ = 0 and U = H the target Γ = U − H vanishes, so Bᵗ = 0 is the fixed point.
    let mut rng = ChaCha20Rng::seed_from_u64(2);
    let h = common::cmat(&mut rng, 6, 2);
    let (mm, gm) = bdris::sumrate::b_subproblem_data(&h, &h, &DMatrix::zeros(6, 2), 5.0, 50.0);
    let out = solve_b_subproblem(&mm, &gm, 1e-3, &Susceptance::zeros(6), &mask_for(MaskKind::Fully, 6)).unwrap();
    assert_eq!(out.matrix().norm(), 0.0);
}
