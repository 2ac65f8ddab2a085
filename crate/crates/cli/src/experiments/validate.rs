//! Self-check: Lipschitz and prox oracles on small instances of every model problem.

use nalgebra::{DMatrix, DVector};
use ogaprox::problems::{
    kernel_matrix, normalize_kernel, BilinearProblem, FairnessProblem, KernelKind, MkSvmProblem, QuadraticScsc,
    ToyProblem,
};
use ogaprox::{validate_problem, SaddleProblem, ValidationReport};
use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::config::ValidateConfig;
use crate::error::Result;
use crate::report::{ExperimentOutput, VERSION};
use crate::rng::{run_rng, Experiment};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProblemCheck {
    pub problem: String,
    pub report: ValidationReport,
    pub passed: bool,
}

fn uniform(r: usize, c: usize, rng: &mut dyn RngCore) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| rng.random_range(-1.0..=1.0))
}

fn sign(v: f64) -> f64 {
    if v >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

fn check<P: SaddleProblem>(name: &str, p: &P, trials: usize, seed: u64) -> Result<ProblemCheck> {
    let report = validate_problem(p, trials, seed)?;
    log::info!("{name}: {report:?}");
    Ok(ProblemCheck { problem: name.into(), passed: report.passed(), report })
}

pub fn validate_all(cfg: &ValidateConfig, seed: u64) -> Result<Vec<ProblemCheck>> {
    let mut rng = run_rng(seed, Experiment::Validate, 0);
    let mut out = Vec::new();
    let t = cfg.trials;
    let mut sub = || rng.next_u64();

    let toy = ToyProblem::random(5, 7, 0.0, &mut run_rng(seed, Experiment::Validate, 1))?;
    out.push(check("toy_nu0", &toy, t, sub())?);
    let toy = ToyProblem::new(toy.a_matrix().clone(), 0.3)?;
    out.push(check("toy_nu0.3", &toy, t, sub())?);

    let mut r = run_rng(seed, Experiment::Validate, 2);
    let bil = BilinearProblem::new(uniform(5, 6, &mut r), DVector::from_fn(5, |_, _| r.random_range(-1.0..=1.0)), 0.5)?;
    out.push(check("bilinear", &bil, t, sub())?);
    let quad = QuadraticScsc::random(6, 5, 0.7, 1.3, 2.0, &mut r)?;
    out.push(check("quadratic", &quad, t, sub())?);

    let z = uniform(16, 4, &mut r);
    let labels = DVector::from_fn(12, |i, _| sign(z[(i, 0)] + 0.3 * z[(i, 1)]));
    let kernels: Vec<DMatrix<f64>> =
        KernelKind::ALL.iter().map(|&k| normalize_kernel(&kernel_matrix(k, &z))).collect::<ogaprox::Result<_>>()?;
    for (name, mu, nu) in [("mksvm_c1", 0.0, 0.0), ("mksvm_a", 0.0, 0.5), ("mksvm_c2", 1.0, 0.5)] {
        let p = MkSvmProblem::from_kernels(&kernels, labels.clone(), 1.0, mu, nu)?;
        out.push(check(name, &p, t, sub())?);
    }

    let w = DVector::from_fn(5, |_, _| r.random_range(-1.0..=1.0));
    let groups = [8, 12]
        .iter()
        .map(|&n| {
            let a = uniform(n, 5, &mut r);
            let b = DVector::from_fn(n, |i, _| sign(a.row(i).transpose().dot(&w) + 0.3 * r.random_range(-1.0..=1.0)));
            (a, b)
        })
        .collect();
    let fair = FairnessProblem::new(groups)?;
    out.push(check("fairness", &fair, cfg.fairness_trials, sub())?);
    Ok(out)
}

pub fn run_validate(cfg: &ValidateConfig, seed: u64) -> Result<ExperimentOutput> {
    let checks = validate_all(cfg, seed)?;
    Ok(ExperimentOutput {
        experiment: Experiment::Validate.name().into(),
        version: VERSION.into(),
        seed,
        config: serde_json::to_value(cfg).unwrap_or_default(),
        series: Vec::new(),
        summary: json!({ "passed": checks.iter().all(|c| c.passed), "checks": checks }),
    })
}
