use std::collections::BTreeMap;

use dydd_core::dd::{
    assemble_global, dd_solve, local_solve, reduced_objective, splitting_defect, DdOptions,
    IndexDecomposition, LocalSolution, SweepMode,
};
use dydd_core::estimation::{cls_objective, cls_solve, ClsProblem};
use dydd_core::linalg::DenseMatrix;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_problem(n: usize, seed: u64) -> ClsProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m0 = n + n / 2 + 1;
    let m1 = n / 2 + 1;
    let boost = 2.0 * (n as f64).sqrt() + 1.0;
    let mut h0 = DenseMatrix::zeros(m0, n);
    for i in 0..m0 {
        for j in 0..n {
            h0[(i, j)] = rng.gen_range(-1.0..1.0);
        }
        if i < n {
            h0[(i, i)] += boost;
        }
    }
    let mut h1 = DenseMatrix::zeros(m1, n);
    for i in 0..m1 {
        h1[(i, rng.gen_range(0..n))] = 1.0;
    }
    let y0 = (0..m0).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let y1 = (0..m1).map(|_| rng.gen_range(-1.0..1.0)).collect();
    ClsProblem::unweighted(h0, y0, h1, y1).unwrap()
}

/// Normal-equation solution computed with nalgebra's own QR.
fn oracle(prob: &ClsProblem) -> Vec<f64> {
    let n = prob.n();
    let m = prob.m0() + prob.m1();
    let mut a = DMatrix::<f64>::zeros(m, n);
    let mut b = DVector::<f64>::zeros(m);
    for i in 0..prob.m0() {
        for j in 0..n {
            a[(i, j)] = prob.h0()[(i, j)];
        }
        b[i] = prob.y0()[i];
    }
    for i in 0..prob.m1() {
        for j in 0..n {
            a[(prob.m0() + i, j)] = prob.h1()[(i, j)];
        }
        b[prob.m0() + i] = prob.y1()[i];
    }
    let qr = a.qr();
    let qtb = qr.q().transpose() * b;
    let x = qr.r().solve_upper_triangular(&qtb).unwrap();
    x.iter().copied().collect()
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

#[test]
fn cls_solve_matches_oracle() {
    let prob = random_problem(24, 3);
    let x = cls_solve(&prob).unwrap();
    assert!(max_diff(&x, &oracle(&prob)) < 1e-10);
}

#[test]
fn both_modes_converge_to_oracle() {
    let prob = random_problem(32, 11);
    let want = oracle(&prob);
    for p in [1, 2, 4] {
        for s in [0, 2] {
            if p == 1 && s > 0 {
                continue;
            }
            let deco = IndexDecomposition::uniform(32, p, s).unwrap();
            for mode in [SweepMode::Multiplicative, SweepMode::Additive] {
                let opts = DdOptions {
                    mode,
                    ..DdOptions::default()
                };
                let mut rep = dd_solve(&prob, &deco, &opts).unwrap();
                rep.set_oracle(&want);
                assert!(rep.converged, "p={p} s={s} {mode:?}");
                assert!(rep.error_vs_oracle.unwrap() < 1e-8, "p={p} s={s} {mode:?}: {rep:?}");
            }
        }
    }
}

#[test]
fn single_subdomain_takes_one_iteration() {
    let prob = random_problem(10, 5);
    let deco = IndexDecomposition::uniform(10, 1, 0).unwrap();
    let rep = dd_solve(&prob, &deco, &DdOptions::default()).unwrap();
    assert_eq!(rep.iterations, 1);
    assert!(max_diff(&rep.x_global, &cls_solve(&prob).unwrap()) < 1e-12);
}

#[test]
fn iteration_cap_reports_not_converged() {
    let prob = random_problem(16, 2);
    let deco = IndexDecomposition::uniform(16, 4, 1).unwrap();
    let opts = DdOptions {
        max_iter: 1,
        ..DdOptions::default()
    };
    let rep = dd_solve(&prob, &deco, &opts).unwrap();
    assert!(!rep.converged);
    assert_eq!(rep.iterations, 1);
}

#[test]
fn residuals_shrink_near_convergence() {
    let prob = random_problem(40, 8);
    let deco = IndexDecomposition::uniform(40, 4, 2).unwrap();
    let rep = dd_solve(&prob, &deco, &DdOptions::default()).unwrap();
    assert!(rep.converged);
    let tail = &rep.residual_history[rep.residual_history.len().saturating_sub(10)..];
    for w in tail.windows(2) {
        assert!(w[1] <= w[0] * (1.0 + 1e-9) + 1e-15, "{tail:?}");
    }
}

#[test]
fn local_solve_fixed_point() {
    let prob = random_problem(20, 17);
    let x = cls_solve(&prob).unwrap();
    for s in [0, 3] {
        let deco = IndexDecomposition::uniform(20, 3, s).unwrap();
        let frozen: BTreeMap<usize, LocalSolution> = (0..3)
            .map(|j| (j, LocalSolution::from_global(&deco, j, &x)))
            .collect();
        for i in 0..3 {
            let loc = local_solve(&prob, &deco, i, &frozen, 1.0).unwrap();
            assert!(max_diff(&loc.x, &x[deco.range(i)]) < 1e-10, "s={s} i={i}");
        }
    }
}

#[test]
fn reduced_objective_equals_full_objective_without_overlap() {
    let prob = random_problem(12, 4);
    let deco = IndexDecomposition::uniform(12, 2, 0).unwrap();
    let x: Vec<f64> = (0..12).map(|k| (k as f64 * 0.37).sin()).collect();
    let a = LocalSolution::from_global(&deco, 0, &x);
    let b = LocalSolution::from_global(&deco, 1, &x);
    let full = cls_objective(&prob, &x).unwrap();
    let red = reduced_objective(&prob, &deco, &a, &b).unwrap();
    assert!((full - red).abs() <= 1e-12 * full.max(1.0));
    assert!(splitting_defect(&prob, &deco, &x).unwrap() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn dd_converges_for_random_splits(seed in 0u64..10_000, n in 8usize..40, p in 1usize..5, s in 0usize..3) {
        prop_assume!(n / p > s + 1);
        let prob = random_problem(n, seed);
        let deco = IndexDecomposition::uniform(n, p, if p == 1 { 0 } else { s }).unwrap();
        let rep = dd_solve(&prob, &deco, &DdOptions::default()).unwrap();
        prop_assert!(rep.converged);
        prop_assert!(max_diff(&rep.x_global, &oracle(&prob)) < 1e-8);
    }

    #[test]
    fn assembly_is_identity_on_consistent_locals(n in 6usize..30, p in 1usize..4, s in 0usize..2, seed in 0u64..1000) {
        prop_assume!(n / p > s + 1);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let deco = IndexDecomposition::uniform(n, p, if p == 1 { 0 } else { s }).unwrap();
        let locals: Vec<_> = (0..p).map(|i| LocalSolution::from_global(&deco, i, &x)).collect();
        let back = assemble_global(&deco, &locals).unwrap();
        prop_assert!(max_diff(&back, &x) < 1e-15);
    }
}
