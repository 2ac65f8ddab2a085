//! Multiple kernel SVM: learn a convex combination of three kernels.

use nalgebra::{DMatrix, DVector};
use ogaprox::problems::{kernel_matrix, normalize_kernel, KernelKind, MkSvmProblem};
use ogaprox::schedule::default_tau0;
use ogaprox::{run, Metrics, RunReport, SaddleProblem, ScheduleKind, ScheduleState, SolverState};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::trimmed_mean;
use crate::config::{MksvmConfig, Variant};
use crate::data::{load_dataset, select, select_rows, split_indices, Dataset};
use crate::error::Result;
use crate::report::{ExperimentOutput, Series, VERSION};
use crate::rng::{run_rng, Experiment};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MksvmRun {
    pub report: RunReport,
    /// Checkpoints where no `y_j` lay strictly inside the box band.
    pub fallback_checkpoints: Vec<usize>,
    pub kernel_weights: Vec<f64>,
}

pub fn schedule_for(cfg: &MksvmConfig, p: &MkSvmProblem) -> Result<ScheduleKind> {
    let c = p.constants();
    let tau0 = cfg.tau0.unwrap_or(cfg.tau_scale * default_tau0(&c));
    Ok(match cfg.variant {
        Variant::C1 => ScheduleKind::constant(&c, Some(tau0), cfg.sigma0)?,
        Variant::A => ScheduleKind::adaptive(&c, Some(tau0), cfg.sigma0)?,
        Variant::C2 => ScheduleKind::linear(&c, None),
    })
}

/// One random split: train on `split` of the rows, report TSA on the rest.
pub fn mksvm_run(ds: &Dataset, cfg: &MksvmConfig, seed: u64, run_index: u32) -> Result<MksvmRun> {
    let mut rng = run_rng(seed, Experiment::Mksvm, run_index);
    let (train, test) = split_indices(ds.len(), cfg.split, &mut rng);
    let order: Vec<usize> = train.iter().chain(&test).copied().collect();
    let z = select_rows(&ds.features, &order);
    let kernels: Vec<DMatrix<f64>> =
        KernelKind::ALL.iter().map(|&k| normalize_kernel(&kernel_matrix(k, &z))).collect::<ogaprox::Result<_>>()?;
    let labels = select(&ds.labels, &train);
    let truth = select(&ds.labels, &test);
    let p = MkSvmProblem::from_kernels(&kernels, labels, cfg.c_box, cfg.mu, cfg.nu)?;
    let kind = schedule_for(cfg, &p)?;
    let d = kernels.len();
    let x0 = DVector::from_element(d, 1.0 / d as f64);
    let y0 = DVector::zeros(train.len());
    let mut fallback = Vec::new();
    let checkpoints = &cfg.checkpoints;
    let mut observer = |s: &SolverState, _: &ScheduleState| -> ogaprox::Result<Metrics> {
        if checkpoints.binary_search(&s.k).is_err() {
            return Ok(Metrics::default());
        }
        let pred = p.predict(&s.x, &s.y, &kernels)?;
        if !pred.j0_in_band {
            fallback.push(s.k);
        }
        let correct = pred.labels.iter().zip(truth.iter()).filter(|(a, b)| a == b).count();
        Ok(Metrics { tsa: Some(100.0 * correct as f64 / truth.len() as f64), ..Metrics::default() })
    };
    let out = run(&p, &kind, &x0, &y0, *checkpoints.last().unwrap_or(&0), &mut observer)?;
    if !fallback.is_empty() {
        log::warn!("{} run {run_index}: offset from the most interior y_j at k = {fallback:?}", ds.name);
    }
    Ok(MksvmRun {
        report: RunReport { records: out.report.with_metrics().copied().collect() },
        fallback_checkpoints: fallback,
        kernel_weights: p.eta(&out.state.x).iter().copied().collect(),
    })
}

/// Per-checkpoint TSA over runs with the extreme runs removed.
pub fn aggregate(runs: &[MksvmRun]) -> RunReport {
    let Some(first) = runs.first() else {
        return RunReport::default();
    };
    let records = first
        .report
        .records
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let vals: Vec<f64> = runs.iter().filter_map(|x| x.report.records.get(i).and_then(|r| r.tsa)).collect();
            let mut rec = *r;
            rec.tsa = Some(trimmed_mean(&vals));
            rec.step_x = None;
            rec.step_y = None;
            rec
        })
        .collect();
    RunReport { records }
}

pub fn mksvm_runs(cfg: &MksvmConfig, seed: u64) -> Result<(Dataset, Vec<MksvmRun>)> {
    let ds = load_dataset(cfg.dataset, &cfg.path)?;
    let runs = (0..cfg.runs).into_par_iter().map(|r| mksvm_run(&ds, cfg, seed, r)).collect::<Result<Vec<_>>>()?;
    Ok((ds, runs))
}

pub fn run_mksvm(cfg: &MksvmConfig, seed: u64) -> Result<ExperimentOutput> {
    let (ds, runs) = mksvm_runs(cfg, seed)?;
    let mean = aggregate(&runs);
    let summary = json!({
        "dataset": ds.name,
        "rows": ds.len(),
        "features": ds.features.ncols(),
        "dropped_rows": ds.dropped_rows,
        "dropped_columns": ds.dropped_columns,
        "tsa_trimmed_mean": mean.records.iter().map(|r| json!({"k": r.k, "tsa": r.tsa})).collect::<Vec<_>>(),
        "fallback_checkpoints": runs.iter().map(|r| &r.fallback_checkpoints).collect::<Vec<_>>(),
        "kernel_weights": runs.iter().map(|r| &r.kernel_weights).collect::<Vec<_>>(),
    });
    let mut series = vec![Series::new(format!("{}_{:?}", ds.name, cfg.variant).to_lowercase(), mean)];
    series.extend(runs.into_iter().enumerate().map(|(i, r)| Series::new(format!("{}_run{i:02}", ds.name), r.report)));
    Ok(ExperimentOutput {
        experiment: Experiment::Mksvm.name().into(),
        version: VERSION.into(),
        seed,
        config: serde_json::to_value(cfg).unwrap_or_default(),
        series,
        summary,
    })
}
