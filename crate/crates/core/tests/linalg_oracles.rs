mod common;

use common::{random_matrix, random_vector};
use nalgebra::{DMatrix, DVector};
use ppa_core::lasso::soft_threshold;
use ppa_core::linalg::*;
use ppa_core::params::ParameterSet;
use ppa_core::proximal::{build_g, check_g_positive_definite, schur_criterion};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn to_na(m: &DenseMatrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(m.rows(), m.cols(), m.as_slice())
}

fn min_eigenvalue(m: &DenseMatrix) -> f64 {
    to_na(m).symmetric_eigen().eigenvalues.min()
}

#[test]
fn woodbury_path_matches_lu_solve() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for case in 0..20 {
        let l = rng.gen_range(1..12);
        let n = rng.gen_range(l + 1..30);
        let rho = rng.gen_range(0.1..10.0);
        let d = random_matrix(&mut rng, l, n);
        let rhs = random_vector(&mut rng, n);
        let solver = RegularizedNormalSolver::new(&d, rho).unwrap();
        assert!(solver.uses_row_space());
        let got = solver.solve(&d, &rhs).unwrap();

        let nd = to_na(&d);
        let lhs = nd.transpose() * &nd + DMatrix::identity(n, n) * rho;
        let want = lhs.lu().solve(&DVector::from_column_slice(&rhs)).unwrap();
        let err = (DVector::from_column_slice(&got) - &want).norm() / want.norm();
        assert!(err <= 1e-10, "case {case}: relative error {err:e}");
    }
}

#[test]
fn direct_path_matches_lu_solve() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..10 {
        let n = rng.gen_range(1..10);
        let l = rng.gen_range(n..20);
        let d = random_matrix(&mut rng, l, n);
        let rhs = random_vector(&mut rng, n);
        let got = solve_regularized_normal(&d, 0.7, &rhs, None).unwrap();
        let nd = to_na(&d);
        let lhs = nd.transpose() * &nd + DMatrix::identity(n, n) * 0.7;
        let want = lhs.lu().solve(&DVector::from_column_slice(&rhs)).unwrap();
        assert!((DVector::from_column_slice(&got) - &want).norm() <= 1e-10 * want.norm());
    }
}

#[test]
fn cholesky_verdict_matches_eigenvalue_signs() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut seen = [0usize; 2];
    for _ in 0..50 {
        let n = rng.gen_range(1..=6);
        let b = random_matrix(&mut rng, n, n);
        let mut m = b.gram_cols();
        // shift so roughly half the cases are indefinite
        m.add_diagonal(rng.gen_range(-0.5..0.5));
        let eig = min_eigenvalue(&m);
        if eig.abs() < 1e-9 {
            m.add_diagonal(1e-3);
        }
        let eig = min_eigenvalue(&m);
        let verdict = is_positive_definite(&m).unwrap();
        assert_eq!(verdict, eig > 0.0, "min eigenvalue {eig:e}");
        seen[verdict as usize] += 1;
    }
    assert!(seen[0] > 0 && seen[1] > 0, "{seen:?}");
}

fn full_rank_pair(rng: &mut ChaCha8Rng, l: usize, m: usize, n: usize) -> (DenseMatrix, DenseMatrix) {
    let mut a = random_matrix(rng, l, m);
    let mut b = random_matrix(rng, l, n);
    for j in 0..m {
        a.set(j, j, a.get(j, j) + 2.0);
    }
    for j in 0..n {
        b.set(l - 1 - j, j, b.get(l - 1 - j, j) + 2.0);
    }
    (a, b)
}

fn random_parameters(rng: &mut ChaCha8Rng) -> ParameterSet {
    ParameterSet::new(
        rng.gen_range(0.0..3.0),
        rng.gen_range(0.0..3.0),
        rng.gen_range(0.2..6.0),
        rng.gen_range(-3.0..3.0),
        rng.gen_range(-3.0..3.0),
        1.0,
    )
}

#[test]
fn valid_parameters_agree_with_cholesky_on_any_full_rank_pair() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut checked = 0;
    while checked < 100 {
        let p = random_parameters(&mut rng);
        if p.validate().is_err() {
            continue;
        }
        let m = rng.gen_range(1..=4);
        let n = rng.gen_range(1..=4);
        let l = rng.gen_range(m.max(n)..=6);
        let (a, b) = full_rank_pair(&mut rng, l, m, n);
        let g = build_g(&p, &a, &b).unwrap();
        assert!(schur_criterion(&p));
        assert!(is_positive_definite(&g).unwrap(), "{p:?}");
        assert!(min_eigenvalue(&g) > 0.0, "{p:?}");
        assert!(check_g_positive_definite(&p, &a, &b).unwrap());
        checked += 1;
    }
}

#[test]
fn verdicts_agree_when_the_block_ranges_overlap() {
    // m + n > l forces range(A) ∩ range(B) ≠ {0}
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let mut agree = [0usize; 2];
    for _ in 0..100 {
        let p = random_parameters(&mut rng);
        let l: usize = rng.gen_range(2..=6);
        let m = rng.gen_range((l + 1).saturating_sub(4).max(1)..=l.min(4));
        let n = rng.gen_range((l + 1 - m).max(1)..=l.min(4));
        let (a, b) = full_rank_pair(&mut rng, l, m, n);
        let schur = schur_criterion(&p);
        let g = build_g(&p, &a, &b).unwrap();
        assert_eq!(is_positive_definite(&g).unwrap(), schur, "{p:?}");
        assert_eq!(min_eigenvalue(&g) > 0.0, schur, "{p:?}");
        assert_eq!(check_g_positive_definite(&p, &a, &b).unwrap(), schur);
        agree[schur as usize] += 1;
    }
    assert!(agree[0] > 0 && agree[1] > 0, "{agree:?}");
}

#[test]
fn orthogonal_block_ranges_make_the_scalar_test_only_sufficient() {
    // A = e₁, B = e₂: the coupling term vanishes from G's Schur complement
    let a = DenseMatrix::from_rows(&[vec![1.0], vec![0.0]]).unwrap();
    let b = DenseMatrix::from_rows(&[vec![0.0], vec![1.0]]).unwrap();
    let p = ParameterSet::new(0.5, 0.5, 3.0, 3.0, 1.5, 1.0);
    assert!(!schur_criterion(&p));
    assert!(is_positive_definite(&build_g(&p, &a, &b).unwrap()).unwrap());
    assert!(matches!(
        check_g_positive_definite(&p, &a, &b),
        Err(ppa_core::proximal::ProximalError::Inconsistent { cholesky: true, schur: false })
    ));
}

fn spd(n: usize, seed: u64) -> DenseMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = random_matrix(&mut rng, n + 2, n).gram_cols();
    m.add_diagonal(0.5);
    m
}

fn vec_strategy(len: usize) -> impl Strategy<Value = DenseVector> {
    prop::collection::vec(-10.0f64..10.0, len).prop_map(|v| DenseVector::from_vec(v).unwrap())
}

proptest! {
    #[test]
    fn cholesky_reconstructs_its_input(n in 1usize..8, seed in any::<u64>()) {
        let m = spd(n, seed);
        let lower = cholesky(&m).unwrap().lower();
        let back = lower.matmul(&lower.transpose()).unwrap();
        for i in 0..n {
            for j in 0..n {
                prop_assert!((back.get(i, j) - m.get(i, j)).abs() <= 1e-12 * m.max_abs());
            }
        }
    }

    #[test]
    fn chol_solve_inverts(n in 1usize..8, seed in any::<u64>()) {
        let m = spd(n, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        let x = random_vector(&mut rng, n);
        let rhs = m.matvec(&x).unwrap();
        let got = chol_solve(&cholesky(&m).unwrap(), &rhs).unwrap();
        prop_assert!(got.sub(&x).norm() <= 1e-9 * x.norm().max(1.0));
    }

    #[test]
    fn normalize_columns_is_idempotent(rows in 1usize..6, cols in 1usize..6, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_matrix(&mut rng, rows, cols);
        prop_assume!((0..cols).all(|j| m.column(j).norm() > 1e-6));
        let once = normalize_columns(&m).unwrap();
        for j in 0..cols {
            prop_assert!((once.column(j).norm() - 1.0).abs() <= 1e-12);
        }
        let twice = normalize_columns(&once).unwrap();
        for (a, b) in once.as_slice().iter().zip(twice.as_slice()) {
            prop_assert!((a - b).abs() <= 1e-15);
        }
    }

    #[test]
    fn soft_threshold_is_nonexpansive(pair in (1usize..20).prop_flat_map(|n| (vec_strategy(n), vec_strategy(n))), kappa in 0.0f64..5.0) {
        let (u, v) = pair;
        let su = soft_threshold(&u, kappa).unwrap();
        let sv = soft_threshold(&v, kappa).unwrap();
        prop_assert!(su.sub(&sv).norm() <= u.sub(&v).norm() + 1e-12);
    }

    #[test]
    fn soft_threshold_satisfies_the_subgradient_condition(v in (1usize..20).prop_flat_map(vec_strategy), kappa in 0.01f64..5.0) {
        // v − x ∈ κ·∂‖x‖₁
        let x = soft_threshold(&v, kappa).unwrap();
        for (xi, vi) in x.iter().zip(v.iter()) {
            let g = vi - xi;
            if *xi == 0.0 {
                prop_assert!(g.abs() <= kappa + 1e-12);
            } else {
                prop_assert!((g - kappa * xi.signum()).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn g_is_symmetric(
        sigma in 0.0f64..5.0, rho in 0.0f64..5.0, s in 0.1f64..5.0,
        tau in -3.0f64..3.0, eps in -3.0f64..3.0, seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_matrix(&mut rng, 4, 2);
        let b = random_matrix(&mut rng, 4, 3);
        let g = build_g(&ParameterSet::new(sigma, rho, s, tau, eps, 1.0), &a, &b).unwrap();
        prop_assert_eq!(g.max_abs_asymmetry(), 0.0);
    }

    #[test]
    fn valid_parameters_give_positive_definite_g(
        s in 0.2f64..10.0, da in 0.01f64..5.0, tau in -4.0f64..4.0, eps in -4.0f64..4.0,
        extra in 0.01f64..3.0, seed in any::<u64>(),
    ) {
        // σ − 1/s = da and ρ − 1/s chosen so the coupling clause holds
        let coupling = (tau * eps / s).powi(2);
        let db = coupling / da * (1.0 + extra) + 1e-3;
        let p = ParameterSet::new(1.0 / s + da, 1.0 / s + db, s, tau, eps, 1.0);
        prop_assume!(p.validate().is_ok());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a = random_matrix(&mut rng, 5, 2);
        let mut b = random_matrix(&mut rng, 5, 2);
        for j in 0..2 {
            a.set(j, j, a.get(j, j) + 2.0);
            b.set(4 - j, j, b.get(4 - j, j) + 2.0);
        }
        prop_assert!(min_eigenvalue(&build_g(&p, &a, &b).unwrap()) > 0.0);
    }
}
