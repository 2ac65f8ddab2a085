//! `Phi(x, y) = <[x]_+, A y>` with `g = delta_C + nu/2 |.|^2`.

use nalgebra::DVector;
use ogaprox::problems::ToyProblem;
use ogaprox::prox::project_polytope;
use ogaprox::{CertificateKind, SaddleProblem, ScheduleKind};
use rand::Rng;
use serde_json::json;

use super::{certified_run, loglog_slope, CertifiedRun};
use crate::config::ToyConfig;
use crate::error::Result;
use crate::report::{ExperimentOutput, Series, VERSION};
use crate::rng::{run_rng, Experiment};

pub struct ToyRuns {
    /// Constant schedule with `nu = 0`.
    pub constant: CertifiedRun,
    /// Adaptive schedule with `nu = cfg.nu`.
    pub adaptive: CertifiedRun,
}

pub fn toy_runs(cfg: &ToyConfig, seed: u64) -> Result<ToyRuns> {
    let mut rng = run_rng(seed, Experiment::Toy, 0);
    let p0 = ToyProblem::random(cfg.d, cfg.n, 0.0, &mut rng)?;
    let pnu = ToyProblem::new(p0.a_matrix().clone(), cfg.nu)?;
    let x0 = DVector::from_fn(cfg.d, |_, _| rng.random_range(-5.0..=5.0));
    let raw_y0 = DVector::from_fn(cfg.n, |_, _| rng.random_range(-5.0..=5.0));
    let y0 = project_polytope(p0.cone(), &raw_y0)?;

    let (xs, ys) = p0.saddle_point().ok_or(ogaprox::Error::MissingSaddlePoint)?;
    let kind = ScheduleKind::constant(&p0.constants(), cfg.tau0, cfg.sigma0)?;
    let constant = certified_run(&p0, &kind, (&xs, &ys), &x0, &y0, &cfg.checkpoints, false, false)?;

    let (xs, ys) = pnu.saddle_point().ok_or(ogaprox::Error::MissingSaddlePoint)?;
    let sigma0 = cfg.adaptive_sigma0.unwrap_or(1.0 / cfg.nu);
    let kind = ScheduleKind::adaptive(&pnu.constants(), None, Some(sigma0))?;
    let adaptive = certified_run(&pnu, &kind, (&xs, &ys), &x0, &y0, &cfg.checkpoints, false, true)?;
    Ok(ToyRuns { constant, adaptive })
}

fn violations(r: &CertifiedRun, kind: CertificateKind) -> usize {
    r.checks.iter().filter(|c| c.kind == kind && !c.holds(1e-9)).count()
}

pub fn run_toy(cfg: &ToyConfig, seed: u64) -> Result<ExperimentOutput> {
    let runs = toy_runs(cfg, seed)?;
    let kmax = cfg.iterations.min(*cfg.checkpoints.last().unwrap_or(&0));
    let summary = json!({
        "constant": {
            "d0": runs.constant.d0,
            "schedule": runs.constant.schedule,
            "gap_slope": loglog_slope(&runs.constant.gaps(), 100, kmax),
            "gap_bound_violations": violations(&runs.constant, CertificateKind::GapO1K),
        },
        "adaptive": {
            "d0": runs.adaptive.d0,
            "schedule": runs.adaptive.schedule,
            "gap_slope": loglog_slope(&runs.adaptive.gaps(), 100, kmax),
            "gap_bound_violations": violations(&runs.adaptive, CertificateKind::GapO1K2),
            "iterate_bound_violations": violations(&runs.adaptive, CertificateKind::IterateO1K),
        },
    });
    Ok(ExperimentOutput {
        experiment: Experiment::Toy.name().into(),
        version: VERSION.into(),
        seed,
        config: serde_json::to_value(cfg).unwrap_or_default(),
        series: vec![
            Series::new("constant_nu0", runs.constant.report),
            Series::new(format!("adaptive_nu{}", cfg.nu), runs.adaptive.report),
        ],
        summary,
    })
}
