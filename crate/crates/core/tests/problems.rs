use nalgebra::{DMatrix, DVector};
use ogaprox::problem::{validate_problem, ExtendedReal, SaddleProblem};
use ogaprox::problems::{
    kernel_matrix, normalize_kernel, BilinearProblem, FairnessProblem, KernelKind, MkSvmProblem, QuadraticScsc,
    ToyProblem,
};
use ogaprox::prox::{project_simplex, prox_oracle, OracleOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

fn gauss_matrix(r: usize, c: usize, rng: &mut ChaCha20Rng) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| rng.sample(StandardNormal))
}

fn toy(nu: f64, seed: u64) -> ToyProblem {
    ToyProblem::random(5, 7, nu, &mut rng(seed)).unwrap()
}

/// Small MKSVM instance on Gaussian features with labels from a noisy linear rule.
fn mksvm(n_train: usize, n_test: usize, mu: f64, nu: f64, seed: u64) -> (MkSvmProblem, Vec<DMatrix<f64>>) {
    let mut r = rng(seed);
    let z = gauss_matrix(n_train + n_test, 4, &mut r);
    let labels = DVector::from_fn(n_train, |i, _| if z[(i, 0)] + 0.3 * z[(i, 1)] >= 0.0 { 1.0 } else { -1.0 });
    let kernels: Vec<_> =
        KernelKind::ALL.iter().map(|&k| normalize_kernel(&kernel_matrix(k, &z)).unwrap()).collect();
    (MkSvmProblem::from_kernels(&kernels, labels, 1.0, mu, nu).unwrap(), kernels)
}

fn fairness(d: usize, sizes: &[usize], seed: u64) -> FairnessProblem {
    let mut r = rng(seed);
    let w = DVector::from_fn(d, |_, _| r.sample::<f64, _>(StandardNormal));
    let groups = sizes
        .iter()
        .map(|&n| {
            let a = gauss_matrix(n, d, &mut r);
            let b = DVector::from_fn(n, |i, _| {
                let s = a.row(i).transpose().dot(&w) + 0.5 * r.sample::<f64, _>(StandardNormal);
                if s >= 0.0 {
                    1.0
                } else {
                    -1.0
                }
            });
            (a, b)
        })
        .collect();
    FairnessProblem::new(groups).unwrap()
}

fn assert_valid<P: SaddleProblem>(p: &P, trials: usize) {
    let rep = validate_problem(p, trials, 17).unwrap();
    assert!(rep.passed(), "{rep:?}");
}

#[test]
fn validation_rejects_zero_trials() {
    assert!(validate_problem(&toy(0.0, 1), 0, 0).is_err());
}

#[test]
fn toy_validates() {
    assert_valid(&toy(0.0, 1), 1000);
    assert_valid(&toy(0.3, 2), 1000);
}

#[test]
fn bilinear_validates() {
    let mut r = rng(3);
    let p = BilinearProblem::new(gauss_matrix(6, 4, &mut r), DVector::from_element(6, 0.5), 0.2).unwrap();
    assert_valid(&p, 1000);
    let (x, y) = p.sample_point(&mut r);
    assert_eq!(p.grad_y(&x, &y).unwrap(), p.grad_y(&x, &y).unwrap());
}

#[test]
fn quadratic_validates() {
    let p = QuadraticScsc::random(6, 5, 1.0, 0.5, 1.0, &mut rng(4)).unwrap();
    assert_valid(&p, 1000);
}

#[test]
fn mksvm_validates() {
    let (p, _) = mksvm(20, 5, 0.0, 0.0, 5);
    assert_valid(&p, 1000);
    let (p, _) = mksvm(20, 5, 1.0, 0.5, 6);
    assert_valid(&p, 1000);
}

#[test]
fn fairness_validates() {
    assert_valid(&fairness(5, &[8, 12], 7), 300);
}

#[test]
fn toy_gradient_examples() {
    let p = toy(0.0, 8);
    let y = DVector::from_element(7, 1.0);
    assert_eq!(p.grad_y(&DVector::from_element(5, -2.0), &y).unwrap(), DVector::zeros(7));
    let mut e1 = DVector::zeros(5);
    e1[0] = 1.0;
    let g = p.grad_y(&e1, &y).unwrap();
    assert!((g - p.a_matrix().row(0).transpose()).amax() < 1e-15);
}

/// Central differences of `y -> Phi(x, y)` against `grad_y`.
fn finite_difference_check<P: SaddleProblem>(p: &P, x: &DVector<f64>, y: &DVector<f64>) {
    let g = p.grad_y(x, y).unwrap();
    let h = 1e-5;
    for i in 0..y.len() {
        let mut yp = y.clone();
        let mut ym = y.clone();
        yp[i] += h;
        ym[i] -= h;
        let fd = (p.phi_value(x, &yp).finite().unwrap() - p.phi_value(x, &ym).finite().unwrap()) / (2.0 * h);
        assert!((fd - g[i]).abs() <= 1e-6 * (1.0 + g[i].abs()), "coord {i}: {fd} vs {}", g[i]);
    }
}

#[test]
fn gradients_match_finite_differences() {
    let mut r = rng(9);
    let p = toy(0.0, 9);
    let (x, y) = p.sample_point(&mut r);
    finite_difference_check(&p, &x, &y);
    let (p, _) = mksvm(15, 3, 0.0, 0.0, 10);
    let (x, y) = p.sample_point(&mut r);
    finite_difference_check(&p, &x, &y);
    let q = QuadraticScsc::random(4, 6, 1.0, 1.0, 2.0, &mut r).unwrap();
    let (x, y) = q.sample_point(&mut r);
    finite_difference_check(&q, &x, &y);
    let f = fairness(3, &[5, 7], 11);
    let (x, y) = f.sample_point(&mut r);
    finite_difference_check(&f, &x, &y);
}

#[test]
fn toy_prox_examples() {
    let p = toy(0.0, 12);
    let (_, y) = p.sample_point(&mut rng(12));
    let zero = DVector::zeros(5);
    assert_eq!(p.prox_phi_x(0.7, &y, &zero).unwrap(), zero);
    let neg = DVector::from_element(5, -0.5);
    assert_eq!(p.prox_phi_x(0.7, &y, &neg).unwrap(), neg);
    let outside = -p.a_matrix().transpose() * DVector::from_element(5, 1.0);
    assert!(p.prox_phi_x(0.7, &outside, &zero).is_err());
}

#[test]
fn toy_prox_matches_oracle_on_larger_instance() {
    let p = ToyProblem::random(20, 30, 0.0, &mut rng(13)).unwrap();
    let mut r = rng(14);
    for t in 0..5 {
        let (x, y) = p.sample_point(&mut r);
        let tau = 0.05 * (t + 1) as f64;
        let cand = p.prox_phi_x(tau, &y, &x).unwrap();
        let f = |u: &DVector<f64>| p.phi_value(u, &y).scale(tau);
        let v = prox_oracle(&f, &x, &cand, &OracleOptions::default().with_seed(t), None).unwrap();
        assert!(v <= 1e-8, "{v}");
    }
}

/// `Psi(x*, y) <= Psi(x*, y*) <= Psi(x, y*)` at random feasible points.
fn saddle_inequalities<P: SaddleProblem>(p: &P, samples: usize, seed: u64) {
    let (xs, ys) = p.saddle_point().expect("known saddle point");
    let mid = p.psi_value(&xs, &ys).finite().unwrap();
    let mut r = rng(seed);
    for _ in 0..samples {
        let (x, y) = p.sample_point(&mut r);
        let left = p.psi_value(&xs, &y).finite().unwrap();
        let right = p.psi_value(&x, &ys).finite().unwrap();
        assert!(left <= mid + 1e-9 * (1.0 + mid.abs()), "{left} > {mid}");
        assert!(mid <= right + 1e-9 * (1.0 + mid.abs()), "{mid} > {right}");
    }
}

#[test]
fn toy_saddle_points() {
    let p = toy(0.3, 15);
    let (xs, ys) = p.saddle_point().unwrap();
    assert_eq!(ys, DVector::zeros(7));
    assert!(xs.iter().all(|&v| v == -1.0));
    saddle_inequalities(&p, 1000, 16);

    let p = toy(0.0, 17);
    let (xs, ys) = p.saddle_point().unwrap();
    assert!(xs.iter().all(|&v| v <= 0.0));
    assert!((ys.norm() - 1.0).abs() < 1e-12);
    assert!((p.a_matrix() * &ys).min() > 0.0);
    saddle_inequalities(&p, 1000, 18);
}

#[test]
fn toy_max_min_direction_is_optimal() {
    let p = toy(0.0, 19);
    let ys = p.max_min_direction().unwrap();
    let best = (p.a_matrix() * &ys).min();
    let mut r = rng(20);
    for _ in 0..10_000 {
        let y = DVector::from_fn(7, |_, _| r.sample::<f64, _>(StandardNormal));
        let y = &y / y.norm();
        assert!((p.a_matrix() * y).min() <= best + 1e-12);
    }
}

#[test]
fn toy_rejects_rank_deficiency() {
    let a = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 2.0, 4.0, 6.0]);
    assert!(matches!(ToyProblem::new(a, 0.0), Err(ogaprox::Error::RankDeficient(_))));
    let tall = DMatrix::from_element(4, 3, 1.0);
    assert!(ToyProblem::new(tall, 0.0).is_err());
}

#[test]
fn toy_gap_simplifies_for_positive_nu() {
    let p = toy(0.3, 21);
    let (xs, ys) = p.saddle_point().unwrap();
    let (xb, yb) = p.sample_point(&mut rng(22));
    let gap = ogaprox::minimax_gap(&p, (&xs, &ys), (&xb, &yb)).unwrap();
    assert!((gap - 0.15 * yb.norm_squared()).abs() <= 1e-12 * (1.0 + gap));
    assert_eq!(ogaprox::minimax_gap(&p, (&xs, &ys), (&xs, &ys)).unwrap(), 0.0);
}

#[test]
fn bilinear_prox_is_explicit() {
    let mut r = rng(23);
    let a = gauss_matrix(5, 3, &mut r);
    let p = BilinearProblem::new(a.clone(), DVector::zeros(5), 0.0).unwrap();
    let (x, y) = p.sample_point(&mut r);
    assert_eq!(p.prox_phi_x(0.4, &y, &x).unwrap(), &x - a.transpose() * &y * 0.4);
}

#[test]
fn quadratic_saddle_examples() {
    let mut r = rng(24);
    let a = gauss_matrix(4, 3, &mut r);
    let p = QuadraticScsc::new(a.clone(), DVector::zeros(3), DVector::zeros(4), 1.0, 2.0).unwrap();
    let (x, y) = p.saddle().unwrap();
    assert!(x.amax() < 1e-15 && y.amax() < 1e-15);

    let b = DVector::from_vec(vec![1.0, -2.0, 0.5]);
    let c = DVector::from_vec(vec![0.3, 0.0, -1.0, 2.0]);
    let p = QuadraticScsc::new(DMatrix::zeros(4, 3), b.clone(), c.clone(), 2.0, 4.0).unwrap();
    let (x, y) = p.saddle().unwrap();
    assert!((x + &b / 2.0).amax() < 1e-15);
    assert!((y + &c / 4.0).amax() < 1e-15);

    let p = QuadraticScsc::random(5, 6, 0.5, 0.8, 1.5, &mut r).unwrap();
    saddle_inequalities(&p, 1000, 25);
    assert!(QuadraticScsc::new(a, DVector::zeros(3), DVector::zeros(4), 0.0, 1.0).is_err());
}

#[test]
fn kernels_normalize_to_unit_diagonal() {
    let (p, kernels) = mksvm(12, 4, 0.0, 0.0, 26);
    for k in &kernels {
        assert!((k.trace() - 16.0).abs() < 1e-12);
        assert!(k.diagonal().iter().all(|&v| (v - 1.0).abs() < 1e-14));
    }
    // c / r_i = d when every trace equals n + l
    let d = kernels.len() as f64;
    let eta = p.eta(&DVector::from_element(3, 1.0));
    assert!(eta.iter().all(|&v| (v - d).abs() < 1e-12));
    for (m, k) in p.m_list().iter().zip(&kernels) {
        let b = p.labels();
        let expect = DMatrix::from_fn(12, 12, |i, j| d * b[i] * b[j] * k[(i, j)]);
        assert!((m - expect).amax() < 1e-12);
    }
    let z = DMatrix::from_row_slice(2, 1, &[0.0, 1.0]);
    let g = kernel_matrix(KernelKind::Gaussian, &z);
    assert!((g[(0, 1)] - (-5.0f64).exp()).abs() < 1e-15);
    assert!(normalize_kernel(&kernel_matrix(KernelKind::Linear, &z)).is_err());
}

#[test]
fn mksvm_examples() {
    let (p, _) = mksvm(10, 2, 0.5, 0.0, 27);
    let x = DVector::from_element(3, 1.0 / 3.0);
    assert_eq!(p.grad_y(&x, &DVector::zeros(10)).unwrap(), DVector::from_element(10, 1.0));
    let y = DVector::from_fn(10, |i, _| 0.1 * i as f64);
    let e1 = DVector::from_vec(vec![1.0, 0.0, 0.0]);
    let g = p.grad_y(&e1, &y).unwrap();
    assert!((g - (DVector::from_element(10, 1.0) - &p.m_list()[0] * &y)).amax() < 1e-14);
    assert!(p.grad_y(&DVector::from_element(3, 1.0), &y).is_err());

    let xin = DVector::from_vec(vec![0.9, -0.3, 0.8]);
    let q = MkSvmProblem::new(p.m_list().to_vec(), DVector::from_element(3, 3.0), p.labels().clone(), 1.0, 0.0, 0.0)
        .unwrap();
    assert_eq!(q.prox_phi_x(0.0, &y, &xin).unwrap(), project_simplex(&xin).unwrap());
    assert_eq!(
        p.prox_phi_x(0.8, &DVector::zeros(10), &xin).unwrap(),
        project_simplex(&(&xin / 1.4)).unwrap()
    );
}

#[test]
fn mksvm_predicts_separable_pair() {
    let z = DMatrix::from_row_slice(4, 1, &[1.0, -1.0, 2.0, -2.0]);
    let kernels = vec![kernel_matrix(KernelKind::Linear, &z)];
    let labels = DVector::from_vec(vec![1.0, -1.0]);
    let p = MkSvmProblem::from_kernels(&kernels, labels, 1.0, 0.0, 0.0).unwrap();
    let x = DVector::from_element(1, 1.0);
    let y = DVector::from_vec(vec![0.5, 0.5]);
    let pred = p.predict(&x, &y, &kernels).unwrap();
    assert!(pred.j0_in_band);
    assert_eq!(pred.labels, vec![1.0, -1.0]);
}

#[test]
fn mksvm_prediction_fallback() {
    let (p, kernels) = mksvm(10, 4, 0.0, 0.0, 28);
    let x = DVector::from_element(3, 1.0 / 3.0);
    let pred = p.predict(&x, &DVector::zeros(10), &kernels).unwrap();
    assert!(!pred.j0_in_band);
    let expected = if pred.gamma >= 0.0 { 1.0 } else { -1.0 };
    assert!(pred.labels.iter().all(|&l| l == expected));
    assert_eq!(pred.gamma, p.labels()[pred.j0]);
}

#[test]
fn mksvm_rejects_bad_input() {
    let z = DMatrix::from_row_slice(3, 1, &[1.0, -1.0, 2.0]);
    let k = vec![kernel_matrix(KernelKind::Polynomial, &z)];
    assert!(MkSvmProblem::from_kernels(&k, DVector::from_vec(vec![1.0, 0.0]), 1.0, 0.0, 0.0).is_err());
    assert!(MkSvmProblem::from_kernels(&k, DVector::from_vec(vec![1.0, 1.0]), 1.0, 0.0, 0.0).is_err());
    assert!(MkSvmProblem::from_kernels(&k, DVector::from_vec(vec![1.0, -1.0]), 0.0, 0.0, 0.0).is_err());
}

/// Dual coordinate ascent for `prox_{tau/n sum_j hinge_j}(x)`:
/// `u = x + sum_j beta_j b_j a_j`, `beta_j` in `[0, tau/n]`.
fn hinge_prox_dual(a: &DMatrix<f64>, b: &DVector<f64>, weights: &[f64], x: &DVector<f64>) -> DVector<f64> {
    let n = a.nrows();
    let mut beta = vec![0.0; n];
    let mut u = x.clone();
    for _ in 0..200_000 {
        let mut change = 0.0_f64;
        for j in 0..n {
            let aj = a.row(j).transpose();
            let g = 1.0 - b[j] * aj.dot(&u);
            let nb = (beta[j] + g / aj.norm_squared()).clamp(0.0, weights[j]);
            let delta = nb - beta[j];
            if delta != 0.0 {
                u.axpy(delta * b[j], &aj, 1.0);
                beta[j] = nb;
                change = change.max(delta.abs());
            }
        }
        if change < 1e-15 {
            break;
        }
    }
    u
}

#[test]
fn fairness_prox_examples() {
    let p = fairness(5, &[6, 9], 29);
    let mut r = rng(30);
    let (x, y) = p.sample_point(&mut r);
    assert_eq!(p.prox_phi_x(0.0, &y, &x).unwrap(), x);
    assert!(p.prox_phi_x(0.5, &DVector::from_vec(vec![0.7, 0.7]), &x).is_err());

    let tau = 2.0;
    let y1 = DVector::from_vec(vec![1.0, 0.0]);
    let u = p.prox_phi_x(tau, &y1, &x).unwrap();
    let w: Vec<f64> = p.group_of().iter().map(|&g| if g == 0 { tau / 6.0 } else { 0.0 }).collect();
    let oracle = hinge_prox_dual(p.features(), p.labels(), &w, &x);
    assert!((&u - &oracle).amax() <= 1e-5, "{}", (&u - &oracle).amax());
}

#[test]
fn fairness_prox_matches_oracle() {
    let p = fairness(5, &[7, 13], 31);
    let mut r = rng(32);
    for t in 0..10 {
        let (x, y) = p.sample_point(&mut r);
        let tau = 10f64.powf(r.random_range(-2.0..1.0));
        let cand = p.prox_phi_x(tau, &y, &x).unwrap();
        let f = |u: &DVector<f64>| p.phi_value(u, &y).scale(tau);
        let v = prox_oracle(&f, &x, &cand, &OracleOptions::default().with_seed(t), None).unwrap();
        assert!(v <= 1e-8, "{v}");
    }
}

/// With one group the x-update is a proximal-point step on the mean hinge loss.
#[test]
fn fairness_single_group_is_proximal_point() {
    let p = fairness(4, &[10, 6], 33).single_group().unwrap();
    assert_eq!(p.num_groups(), 1);
    let y = DVector::from_element(1, 1.0);
    let tau = 0.5;
    let w = vec![tau / 16.0; 16];
    let mut x = DVector::from_element(4, 0.1);
    let mut xr = x.clone();
    for _ in 0..20 {
        x = p.prox_phi_x(tau, &y, &x).unwrap();
        xr = hinge_prox_dual(p.features(), p.labels(), &w, &xr);
        assert!((&x - &xr).amax() <= 1e-8, "{}", (&x - &xr).amax());
    }
}

#[test]
fn fairness_rejects_bad_groups() {
    let a = DMatrix::from_element(2, 3, 1.0);
    assert!(FairnessProblem::new(vec![]).is_err());
    assert!(FairnessProblem::new(vec![(DMatrix::zeros(0, 3), DVector::zeros(0))]).is_err());
    assert!(FairnessProblem::new(vec![(a.clone(), DVector::from_vec(vec![1.0, 0.0]))]).is_err());
    assert!(FairnessProblem::new(vec![(a, DVector::from_vec(vec![1.0]))]).is_err());
}

#[test]
fn fairness_constants() {
    let p = fairness(3, &[4, 5], 34);
    let mut expect = 0.0;
    for (j, &g) in p.group_of().iter().enumerate() {
        expect += p.features().row(j).norm_squared() / p.group_sizes()[g] as f64;
    }
    assert!((p.constants().l_yx - expect.sqrt()).abs() < 1e-12);
    assert_eq!(p.g_value(&DVector::from_vec(vec![0.6, 0.6])), ExtendedReal::PlusInf);
}
