use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ogaprox::prox::{project_box_hyperplane, project_polytope, project_simplex, BoxHyperplaneSet};
use ogaprox::qp::{solve_qp, QpOptions};
use ogaprox::{make_schedule, no_metrics, run, step, SaddleProblem, ScheduleKind, SolverState};
use ogaprox_bench::{cone, feasible_qp, quadratic, rng, toy, uniform_vector};
use std::hint::black_box;

fn qp(c: &mut Criterion) {
    let mut g = c.benchmark_group("qp");
    for (n, m) in [(10, 20), (40, 80), (100, 150)] {
        let p = feasible_qp(n, m, 1);
        g.bench_with_input(BenchmarkId::from_parameter(format!("{n}x{m}")), &p, |b, p| {
            b.iter(|| solve_qp(black_box(p), &QpOptions::default()).unwrap())
        });
    }
    g.finish();
}

fn projections(c: &mut Criterion) {
    let mut g = c.benchmark_group("projection");
    let mut r = rng(2);
    for n in [100, 1000] {
        let v = uniform_vector(n, 3.0, &mut r);
        g.bench_with_input(BenchmarkId::new("simplex", n), &v, |b, v| b.iter(|| project_simplex(black_box(v)).unwrap()));
        let signs = nalgebra::DVector::from_fn(n, |i, _| if i % 2 == 0 { 1.0 } else { -1.0 });
        let set = BoxHyperplaneSet::new(0.0, 1.0, signs, 0.0).unwrap();
        g.bench_with_input(BenchmarkId::new("box_hyperplane", n), &v, |b, v| {
            b.iter(|| project_box_hyperplane(&set, black_box(v)).unwrap())
        });
    }
    for (d, n) in [(10, 20), (50, 70)] {
        let s = cone(d, n, 3);
        let v = uniform_vector(n, 5.0, &mut r);
        g.bench_with_input(BenchmarkId::new("polytope", format!("{d}x{n}")), &v, |b, v| {
            b.iter(|| project_polytope(&s, black_box(v)).unwrap())
        });
    }
    g.finish();
}

fn solver_steps(c: &mut Criterion) {
    let mut g = c.benchmark_group("step");
    let (p, x0, y0) = toy(250, 350, 0.3, 4);
    let kind = ScheduleKind::adaptive(&p.constants(), None, None).unwrap();
    let sched = make_schedule(&kind, &p.constants()).unwrap();
    g.bench_function("toy_250x350", |b| {
        b.iter_batched(
            || SolverState::new(&p, &x0, &y0).unwrap(),
            |mut s| step(&p, &mut s, &sched).unwrap(),
            criterion::BatchSize::SmallInput,
        )
    });
    let q = quadratic(40, 40, 5);
    let kind = ScheduleKind::linear(&q.constants(), None);
    let (x0, y0) = (nalgebra::DVector::zeros(40), nalgebra::DVector::zeros(40));
    g.bench_function("quadratic_40x40_500_steps", |b| b.iter(|| run(&q, &kind, &x0, &y0, 500, &mut no_metrics).unwrap()));
    g.finish();
}

criterion_group!(benches, qp, projections, solver_steps);
criterion_main!(benches);
