//! Minimax group fairness on heart-disease with a linear classifier.

use nalgebra::{DMatrix, DVector};
use ogaprox::problems::FairnessProblem;
use ogaprox::schedule::default_tau0;
use ogaprox::{run, Metrics, MetricRecord, RunReport, SaddleProblem, ScheduleKind, ScheduleState, SolverState};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::config::FairnessConfig;
use crate::data::{load_dataset, select, select_rows, split_indices, DatasetName};
use crate::error::Result;
use crate::report::{ExperimentOutput, Series, VERSION};
use crate::rng::{run_rng, Experiment};

/// TSA of one model on one partition at one checkpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FairnessPoint {
    pub k: usize,
    pub overall: f64,
    /// `None` when the test split holds no sample of the group.
    pub groups: Vec<Option<f64>>,
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FairnessPartition {
    pub with_fairness: Vec<FairnessPoint>,
    pub without_fairness: Vec<FairnessPoint>,
    pub records_with: RunReport,
    pub records_without: RunReport,
}

/// Features with a trailing constant column, so the classifier has an offset.
pub fn with_bias(z: &DMatrix<f64>) -> DMatrix<f64> {
    z.clone().insert_column(z.ncols(), 1.0)
}

fn tsa(x: &DVector<f64>, feats: &DMatrix<f64>, labels: &DVector<f64>, groups: &[usize], m: usize) -> (f64, Vec<Option<f64>>) {
    let score = feats * x;
    let mut hit = vec![0usize; m];
    let mut tot = vec![0usize; m];
    for i in 0..labels.len() {
        let pred = if score[i] >= 0.0 { 1.0 } else { -1.0 };
        tot[groups[i]] += 1;
        if pred == labels[i] {
            hit[groups[i]] += 1;
        }
    }
    let overall = 100.0 * hit.iter().sum::<usize>() as f64 / labels.len() as f64;
    let per = (0..m).map(|g| (tot[g] > 0).then(|| 100.0 * hit[g] as f64 / tot[g] as f64)).collect();
    (overall, per)
}

fn schedule_for(cfg: &FairnessConfig, p: &FairnessProblem) -> Result<ScheduleKind> {
    let c = p.constants();
    let tau0 = cfg.tau0.unwrap_or(cfg.tau_scale * default_tau0(&c));
    Ok(ScheduleKind::constant(&c, Some(tau0), cfg.sigma0)?)
}

struct TestSet<'a> {
    feats: &'a DMatrix<f64>,
    labels: &'a DVector<f64>,
    groups: &'a [usize],
    m: usize,
}

fn fit(cfg: &FairnessConfig, p: &FairnessProblem, test: &TestSet<'_>) -> Result<(Vec<FairnessPoint>, RunReport)> {
    let kind = schedule_for(cfg, p)?;
    let x0 = DVector::zeros(p.dim_x());
    let y0 = DVector::from_element(p.dim_y(), 1.0 / p.dim_y() as f64);
    let mut points = Vec::new();
    let mut observer = |s: &SolverState, _: &ScheduleState| -> ogaprox::Result<Metrics> {
        if cfg.checkpoints.binary_search(&s.k).is_err() {
            return Ok(Metrics::default());
        }
        let (overall, groups) = tsa(&s.x, test.feats, test.labels, test.groups, test.m);
        points.push(FairnessPoint { k: s.k, overall, groups, weights: s.y.iter().copied().collect() });
        Ok(Metrics { tsa: Some(overall), ..Metrics::default() })
    };
    let out = run(p, &kind, &x0, &y0, *cfg.checkpoints.last().unwrap_or(&0), &mut observer)?;
    Ok((points, RunReport { records: out.report.with_metrics().copied().collect() }))
}

pub fn fairness_partition(
    cfg: &FairnessConfig,
    feats: &DMatrix<f64>,
    labels: &DVector<f64>,
    groups: &[usize],
    seed: u64,
    index: u32,
) -> Result<FairnessPartition> {
    let m = cfg.grouping.names().len();
    let mut rng = run_rng(seed, Experiment::Fairness, index);
    let (train, test) = split_indices(labels.len(), cfg.split, &mut rng);
    let blocks = (0..m)
        .map(|g| {
            let rows: Vec<usize> = train.iter().copied().filter(|&i| groups[i] == g).collect();
            (select_rows(feats, &rows), select(labels, &rows))
        })
        .collect();
    let fair = FairnessProblem::new(blocks)?;
    let plain = fair.single_group()?;
    let test_feats = select_rows(feats, &test);
    let test_labels = select(labels, &test);
    let test_groups: Vec<usize> = test.iter().map(|&i| groups[i]).collect();
    let ts = TestSet { feats: &test_feats, labels: &test_labels, groups: &test_groups, m };
    let (with_fairness, records_with) = fit(cfg, &fair, &ts)?;
    let (without_fairness, records_without) = fit(cfg, &plain, &ts)?;
    Ok(FairnessPartition { with_fairness, without_fairness, records_with, records_without })
}

pub fn fairness_partitions(cfg: &FairnessConfig, seed: u64) -> Result<Vec<FairnessPartition>> {
    let ds = load_dataset(DatasetName::HeartDisease, &cfg.path)?;
    let groups = ds.groups(cfg.grouping)?;
    let feats = with_bias(&ds.features);
    (0..cfg.partitions)
        .into_par_iter()
        .map(|i| fairness_partition(cfg, &feats, &ds.labels, &groups, seed, i))
        .collect()
}

/// Averages over partitions: overall TSA and per-group TSA at each checkpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FairnessTable {
    pub k: usize,
    pub overall: f64,
    pub groups: Vec<f64>,
}

impl FairnessTable {
    pub fn min_group(&self) -> f64 {
        self.groups.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

pub fn table(parts: &[FairnessPartition], with: bool) -> Vec<FairnessTable> {
    let pick = |p: &FairnessPartition| if with { p.with_fairness.clone() } else { p.without_fairness.clone() };
    let runs: Vec<Vec<FairnessPoint>> = parts.iter().map(pick).collect();
    let Some(first) = runs.first() else {
        return Vec::new();
    };
    let m = first.first().map_or(0, |p| p.groups.len());
    (0..first.len())
        .map(|i| {
            let pts: Vec<&FairnessPoint> = runs.iter().map(|r| &r[i]).collect();
            let overall = pts.iter().map(|p| p.overall).sum::<f64>() / pts.len() as f64;
            let groups = (0..m)
                .map(|g| {
                    let v: Vec<f64> = pts.iter().filter_map(|p| p.groups[g]).collect();
                    v.iter().sum::<f64>() / v.len() as f64
                })
                .collect();
            FairnessTable { k: first[i].k, overall, groups }
        })
        .collect()
}

fn series_from(name: String, rows: &[FairnessTable], tsa: impl Fn(&FairnessTable) -> f64, template: &RunReport) -> Series {
    let records = rows
        .iter()
        .zip(&template.records)
        .map(|(t, r)| MetricRecord { tsa: Some(tsa(t)), step_x: None, step_y: None, ..*r })
        .collect();
    Series::new(name, RunReport { records })
}

pub fn run_fairness(cfg: &FairnessConfig, seed: u64) -> Result<ExperimentOutput> {
    let parts = fairness_partitions(cfg, seed)?;
    let names = cfg.grouping.names();
    let mut series = Vec::new();
    let mut summary = serde_json::Map::new();
    for (label, with) in [("with", true), ("without", false)] {
        let rows = table(&parts, with);
        let template = if with { &parts[0].records_with } else { &parts[0].records_without };
        series.push(series_from(format!("{label}_overall"), &rows, |t| t.overall, template));
        for (g, name) in names.iter().enumerate() {
            series.push(series_from(format!("{label}_{name}"), &rows, |t| t.groups[g], template));
        }
        summary.insert(label.into(), json!(rows));
    }
    summary.insert("groups".into(), json!(names));
    Ok(ExperimentOutput {
        experiment: format!("{}_{:?}", Experiment::Fairness.name(), cfg.grouping).to_lowercase(),
        version: VERSION.into(),
        seed,
        config: serde_json::to_value(cfg).unwrap_or_default(),
        series,
        summary: summary.into(),
    })
}
