use ogaprox::qp::{solution_kkt, solve_qp, QpOptions};
use ogaprox::SaddleProblem;
use ogaprox_bench::{feasible_qp, quadratic, toy};

#[test]
fn fixtures_are_valid() {
    let p = feasible_qp(10, 20, 1);
    let s = solve_qp(&p, &QpOptions::default()).unwrap();
    assert!(solution_kkt(&p, &s).max() <= 1e-9);
    let (t, x0, y0) = toy(20, 30, 0.3, 4);
    t.check_start(&x0, &y0).unwrap();
    assert!(quadratic(8, 6, 5).saddle().is_ok());
}
