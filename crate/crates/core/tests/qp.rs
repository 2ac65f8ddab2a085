use nalgebra::{DMatrix, DVector};
use ogaprox::qp::{solution_kkt, solve_qp, solve_qp_from, QpOptions, QpProblem, QpStatus, WarmStart};
use ogaprox::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

fn gauss(rng: &mut ChaCha20Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// Positive definite `Q`, `m` inequalities that hold at a known interior-ish point.
fn random_qp(n: usize, m: usize, p: usize, seed: u64) -> (QpProblem, DVector<f64>) {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let b = DMatrix::from_fn(n, n, |_, _| gauss(&mut rng));
    let q = &b * b.transpose() + DMatrix::identity(n, n) * 0.1;
    let c = DVector::from_fn(n, |_, _| 3.0 * gauss(&mut rng));
    let g = DMatrix::from_fn(m, n, |_, _| gauss(&mut rng));
    let u0 = DVector::from_fn(n, |_, _| gauss(&mut rng));
    let h = &g * &u0 - DVector::from_fn(m, |_, _| rng.random_range(0.0..0.5));
    let mut qp = QpProblem::new(q, c).with_inequalities(g, h);
    if p > 0 {
        let e = DMatrix::from_fn(p, n, |_, _| gauss(&mut rng));
        let ev = &e * &u0;
        qp = qp.with_equalities(e, ev);
    }
    (qp, u0)
}

#[test]
fn unconstrained_minimizer() {
    let c = DVector::from_vec(vec![1.0, -2.0, 3.5]);
    let qp = QpProblem::new(DMatrix::identity(3, 3), -&c);
    let s = solve_qp(&qp, &QpOptions::default()).unwrap();
    assert_eq!(s.status, QpStatus::Optimal);
    assert!((s.x - c).amax() < 1e-14);
}

#[test]
fn nonnegative_clipping() {
    let v = DVector::from_vec(vec![1.0, -2.0, 0.0, 3.0, -0.1]);
    let qp = QpProblem::new(DMatrix::identity(5, 5), -&v).with_inequalities(DMatrix::identity(5, 5), DVector::zeros(5));
    let s = solve_qp(&qp, &QpOptions::default()).unwrap();
    assert!((s.x - v.map(|x| x.max(0.0))).amax() < 1e-14);
}

#[test]
fn beats_random_feasible_samples() {
    let (qp, u0) = random_qp(8, 5, 0, 11);
    let s = solve_qp(&qp, &QpOptions::default()).unwrap();
    assert_eq!(s.status, QpStatus::Optimal);
    assert!(solution_kkt(&qp, &s).max() <= 1e-8);
    let best = qp.objective(&s.x);
    let mut rng = ChaCha20Rng::seed_from_u64(12);
    let mut sampled = 0;
    for _ in 0..1_000_000 {
        let r = rng.random_range(0.0..3.0);
        let u = &u0 + DVector::from_fn(8, |_, _| r * gauss(&mut rng));
        if qp.infeasibility(&u) > 0.0 {
            continue;
        }
        sampled += 1;
        assert!(best <= qp.objective(&u) + 1e-6);
    }
    assert!(sampled > 1000);
}

#[test]
fn infeasible_is_reported() {
    let g = DMatrix::from_row_slice(2, 1, &[1.0, -1.0]);
    let h = DVector::from_vec(vec![1.0, 0.0]);
    let qp = QpProblem::new(DMatrix::identity(1, 1), DVector::zeros(1)).with_inequalities(g, h);
    let s = solve_qp(&qp, &QpOptions::default()).unwrap();
    assert_eq!(s.status, QpStatus::Infeasible);
    assert!(matches!(s.into_optimal(), Err(Error::Qp { status: QpStatus::Infeasible, .. })));
}

#[test]
fn max_iter_is_reported() {
    let (qp, _) = random_qp(10, 30, 0, 3);
    let s = solve_qp(&qp, &QpOptions { tol: 1e-9, max_iter: Some(1) }).unwrap();
    assert_ne!(s.status, QpStatus::Infeasible);
    let full = solve_qp(&qp, &QpOptions::default()).unwrap();
    assert_eq!(full.status, QpStatus::Optimal);
    if full.iterations > 1 {
        assert_eq!(s.status, QpStatus::MaxIter);
    }
}

#[test]
fn rejects_malformed_problems() {
    let asym = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
    assert!(solve_qp(&QpProblem::new(asym, DVector::zeros(2)), &QpOptions::default()).is_err());
    let qp = QpProblem::new(DMatrix::identity(2, 2), DVector::zeros(3));
    assert!(matches!(solve_qp(&qp, &QpOptions::default()), Err(Error::Dimension(_))));
}

#[test]
fn psd_hessian_with_slacks() {
    // min 1/2 u^2 + r  s.t. r >= 0, r + u >= 1: optimum u = 1 (tie), r = 0
    let q = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
    let g = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 1.0]);
    let qp = QpProblem::new(q, DVector::from_vec(vec![0.0, 2.0])).with_inequalities(g, DVector::from_vec(vec![0.0, 1.0]));
    let s = solve_qp(&qp, &QpOptions::default()).unwrap();
    assert_eq!(s.status, QpStatus::Optimal);
    assert!((s.x[0] - 1.0).abs() < 1e-12 && s.x[1].abs() < 1e-12);
}

#[test]
fn deterministic_bits() {
    let (qp, _) = random_qp(12, 20, 1, 21);
    let a = solve_qp(&qp, &QpOptions::default()).unwrap();
    let b = solve_qp(&qp, &QpOptions::default()).unwrap();
    assert_eq!(a, b);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kkt_holds(n in 2usize..12, m in 0usize..25, p in 0usize..2, seed in any::<u64>()) {
        let (qp, _) = random_qp(n, m, p.min(n - 1), seed);
        let s = solve_qp(&qp, &QpOptions::default()).unwrap();
        prop_assert_eq!(s.status, QpStatus::Optimal);
        prop_assert!(solution_kkt(&qp, &s).max() <= 1e-9);
    }

    #[test]
    fn warm_start_agrees(n in 2usize..10, m in 1usize..20, seed in any::<u64>()) {
        let (qp, u0) = random_qp(n, m, 0, seed);
        let cold = solve_qp(&qp, &QpOptions::default()).unwrap();
        let warm = solve_qp_from(&qp, &QpOptions::default(), &WarmStart { point: u0, working_set: vec![] }).unwrap();
        prop_assert!((cold.x - warm.x).amax() <= 1e-8);
    }
}
