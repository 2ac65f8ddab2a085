pub mod fairness;
pub mod mksvm;
pub mod synthetic;
pub mod toy;
pub mod validate;

use nalgebra::DVector;
use ogaprox::schedule::initial_distance;
use ogaprox::{
    gap_certificate, make_schedule, run, CertificateCheck, Metrics, RunReport, SaddleProblem, ScheduleKind,
};
use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Least-squares slope of `log value` against `log k` over `k` in `[k_min, k_max]`,
/// ignoring non-positive values.
pub fn loglog_slope(points: &[(usize, f64)], k_min: usize, k_max: usize) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(k, v)| *k >= k_min && *k <= k_max && *v > 0.0 && v.is_finite())
        .map(|&(k, v)| ((k as f64).ln(), v.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Mean after removing one minimum and one maximum; plain mean for fewer than three values.
pub fn trimmed_mean(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let core = if v.len() > 2 { &v[1..v.len() - 1] } else { &v[..] };
    core.iter().sum::<f64>() / core.len() as f64
}

/// Certified run against a known saddle point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertifiedRun {
    pub schedule: ScheduleKind,
    pub d0: f64,
    pub report: RunReport,
    pub checks: Vec<CertificateCheck>,
}

impl CertifiedRun {
    /// `(k, gap)` at every recorded checkpoint.
    pub fn gaps(&self) -> Vec<(usize, f64)> {
        self.report.records.iter().filter_map(|r| r.gap.map(|g| (r.k, g))).collect()
    }
}

/// Runs `kind` and records gap, distances and every certificate at `checkpoints`.
#[allow(clippy::too_many_arguments)]
pub fn certified_run<P: SaddleProblem + ?Sized>(
    p: &P,
    kind: &ScheduleKind,
    saddle: (&DVector<f64>, &DVector<f64>),
    x0: &DVector<f64>,
    y0: &DVector<f64>,
    checkpoints: &[usize],
    with_dist_x: bool,
    with_dist_y: bool,
) -> Result<CertifiedRun> {
    let initial = make_schedule(kind, &p.constants())?;
    let d0 = initial_distance(&initial, saddle, (x0, y0));
    let mut checks = Vec::new();
    let max = checkpoints.last().copied().unwrap_or(0);
    let mut observer = |s: &ogaprox::SolverState, _: &ogaprox::ScheduleState| -> ogaprox::Result<Metrics> {
        if checkpoints.binary_search(&s.k).is_err() {
            return Ok(Metrics::default());
        }
        let found = gap_certificate(p, Some(saddle), s, kind, &initial)?;
        let gap = found.first().map(|c| c.gap);
        checks.extend(found);
        Ok(Metrics {
            gap,
            dist_x: with_dist_x.then(|| (&s.x - saddle.0).norm()),
            dist_y: with_dist_y.then(|| (&s.y - saddle.1).norm()),
            tsa: None,
        })
    };
    let out = run(p, kind, x0, y0, max, &mut observer)?;
    let report = RunReport { records: out.report.with_metrics().copied().collect() };
    Ok(CertifiedRun { schedule: *kind, d0, report, checks })
}
