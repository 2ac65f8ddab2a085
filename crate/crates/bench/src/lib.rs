//! Fixed-seed problem instances shared by the benchmarks.

use nalgebra::{DMatrix, DVector};
use ogaprox::problems::{QuadraticScsc, ToyProblem};
use ogaprox::prox::PolytopeSet;
use ogaprox::qp::QpProblem;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

pub fn uniform_matrix(r: usize, c: usize, rng: &mut ChaCha20Rng) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| rng.random_range(-1.0..=1.0))
}

pub fn uniform_vector(n: usize, scale: f64, rng: &mut ChaCha20Rng) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.random_range(-scale..=scale))
}

/// Strictly convex QP with `m` inequalities, feasible by construction.
pub fn feasible_qp(n: usize, m: usize, seed: u64) -> QpProblem {
    let mut r = rng(seed);
    let b = uniform_matrix(n, n, &mut r);
    let q = &b * b.transpose() + DMatrix::identity(n, n) * 0.1;
    let g = uniform_matrix(m, n, &mut r);
    let u0 = uniform_vector(n, 1.0, &mut r);
    let h = &g * &u0 - DVector::from_fn(m, |_, _| r.random_range(0.0..0.5));
    QpProblem::new(q, uniform_vector(n, 3.0, &mut r)).with_inequalities(g, h)
}

pub fn cone(d: usize, n: usize, seed: u64) -> PolytopeSet {
    PolytopeSet::new(uniform_matrix(d, n, &mut rng(seed)))
}

/// Toy instance with a feasible start `(x0, y0)`.
pub fn toy(d: usize, n: usize, nu: f64, seed: u64) -> (ToyProblem, DVector<f64>, DVector<f64>) {
    let mut r = rng(seed);
    let p = ToyProblem::random(d, n, nu, &mut r).expect("toy instance");
    let x0 = uniform_vector(d, 5.0, &mut r);
    (p, x0, DVector::zeros(n))
}

pub fn quadratic(d: usize, n: usize, seed: u64) -> QuadraticScsc {
    QuadraticScsc::random(d, n, 1.0, 1.0, 1.0, &mut rng(seed)).expect("quadratic instance")
}
