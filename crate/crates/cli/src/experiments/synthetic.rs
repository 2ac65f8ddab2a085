//! Centered strongly convex-strongly concave quadratic with a known saddle point.

use nalgebra::DVector;
use ogaprox::problems::QuadraticScsc;
use ogaprox::{SaddleProblem, ScheduleKind};
use rand::Rng;
use serde_json::json;

use super::{certified_run, CertifiedRun};
use crate::config::SyntheticConfig;
use crate::error::Result;
use crate::report::{ExperimentOutput, Series, VERSION};
use crate::rng::{run_rng, Experiment};

pub struct SyntheticRun {
    pub problem: QuadraticScsc,
    pub run: CertifiedRun,
}

/// `b = c = 0`, so the saddle point is the origin; starts are uniform on `[-1, 1]`.
pub fn synthetic_run(cfg: &SyntheticConfig, seed: u64) -> Result<SyntheticRun> {
    let mut rng = run_rng(seed, Experiment::Synthetic, 0);
    let drawn = QuadraticScsc::random(cfg.d, cfg.n, cfg.mu, cfg.nu, cfg.a_norm, &mut rng)?;
    let p = QuadraticScsc::new(drawn.a_matrix().clone(), DVector::zeros(cfg.d), DVector::zeros(cfg.n), cfg.mu, cfg.nu)?;
    let x0 = DVector::from_fn(cfg.d, |_, _| rng.random_range(-1.0..=1.0));
    let y0 = DVector::from_fn(cfg.n, |_, _| rng.random_range(-1.0..=1.0));
    let (xs, ys) = p.saddle()?;
    let kind = ScheduleKind::linear(&p.constants(), cfg.theta);
    let run = certified_run(&p, &kind, (&xs, &ys), &x0, &y0, &cfg.checkpoints, true, true)?;
    Ok(SyntheticRun { problem: p, run })
}

pub fn run_synthetic(cfg: &SyntheticConfig, seed: u64) -> Result<ExperimentOutput> {
    let SyntheticRun { run, .. } = synthetic_run(cfg, seed)?;
    let violations = run.checks.iter().filter(|c| !c.holds(1e-8 * c.bound)).count();
    let worst = run.checks.iter().map(|c| c.value / c.bound).fold(0.0, f64::max);
    let summary = json!({
        "d0": run.d0,
        "schedule": run.schedule,
        "certificate_violations": violations,
        "worst_ratio": worst,
    });
    Ok(ExperimentOutput {
        experiment: Experiment::Synthetic.name().into(),
        version: VERSION.into(),
        seed,
        config: serde_json::to_value(cfg).unwrap_or_default(),
        series: vec![Series::new("linear", run.report)],
        summary,
    })
}
