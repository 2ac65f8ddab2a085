//! The OGAProx iteration, ergodic averaging and certificate checks.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::SaddleProblem;
use crate::schedule::{
    certificates, initial_distance, make_schedule, schedule_advance, CertificateKind, RateCertificate, ScheduleKind,
    ScheduleState,
};

/// Iterate pair, previous x, cached gradient and ergodic means.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    /// Number of completed steps.
    pub k: usize,
    pub x: DVector<f64>,
    pub x_prev: DVector<f64>,
    pub y: DVector<f64>,
    /// `grad_y Phi(x_{k-1}, y_{k-1})`.
    pub grad_prev: DVector<f64>,
    /// Weighted mean of `x_1, ..., x_k` with weights `t_0, ..., t_{k-1}`.
    pub erg_x: DVector<f64>,
    pub erg_y: DVector<f64>,
    /// `T_k = t_0 + ... + t_{k-1}`.
    pub weight_sum: f64,
    /// `T_k / t_{k-1}`, kept so the running mean never needs `t_k` itself.
    erg_ratio: f64,
    /// `(|x_k - x_{k-1}|, |y_k - y_{k-1}|)` of the last step.
    pub last_step: (f64, f64),
    pub x0: DVector<f64>,
    pub y0: DVector<f64>,
}

impl SolverState {
    /// State with `x_{-1} = x_0`, `y_{-1} = y_0`.
    pub fn new<P: SaddleProblem + ?Sized>(p: &P, x0: &DVector<f64>, y0: &DVector<f64>) -> Result<Self> {
        p.check_start(x0, y0)?;
        let grad = p.grad_y(x0, y0)?;
        Ok(SolverState {
            k: 0,
            x: x0.clone(),
            x_prev: x0.clone(),
            y: y0.clone(),
            grad_prev: grad,
            erg_x: x0.clone(),
            erg_y: y0.clone(),
            weight_sum: 0.0,
            erg_ratio: 0.0,
            last_step: (0.0, 0.0),
            x0: x0.clone(),
            y0: y0.clone(),
        })
    }

    pub fn ergodic(&self) -> (&DVector<f64>, &DVector<f64>) {
        (&self.erg_x, &self.erg_y)
    }
}

fn all_finite(v: &DVector<f64>) -> bool {
    v.iter().all(|x| x.is_finite())
}

/// One OGAProx step with the parameters in `sched`.
pub fn step<P: SaddleProblem + ?Sized>(p: &P, s: &mut SolverState, sched: &ScheduleState) -> Result<()> {
    let g_cur = p.grad_y(&s.x, &s.y)?;
    let mut v = &g_cur * (1.0 + sched.theta);
    v.axpy(-sched.theta, &s.grad_prev, 1.0);
    v *= sched.sigma;
    v += &s.y;
    let y_new = p.prox_g(sched.sigma, &v)?;
    let x_new = p.prox_phi_x(sched.tau, &y_new, &s.x)?;
    if !all_finite(&y_new) || !all_finite(&x_new) {
        return Err(Error::NonFiniteIterate { k: s.k });
    }
    let q = if s.k == 0 { 0.0 } else { s.erg_ratio * sched.theta };
    let w = 1.0 / (q + 1.0);
    s.erg_x.axpy(w, &(&x_new - &s.erg_x), 1.0);
    s.erg_y.axpy(w, &(&y_new - &s.erg_y), 1.0);
    s.erg_ratio = q + 1.0;
    s.weight_sum += sched.t;
    s.last_step = ((&x_new - &s.x).norm(), (&y_new - &s.y).norm());
    s.grad_prev = g_cur;
    s.x_prev = std::mem::replace(&mut s.x, x_new);
    s.y = y_new;
    s.k += 1;
    Ok(())
}

/// Problem-specific metrics attached to an iteration record.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub gap: Option<f64>,
    pub dist_x: Option<f64>,
    pub dist_y: Option<f64>,
    pub tsa: Option<f64>,
}

/// One row of a run report; `k` counts completed steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricRecord {
    pub k: usize,
    pub gap: Option<f64>,
    pub dist_x: Option<f64>,
    pub dist_y: Option<f64>,
    pub tsa: Option<f64>,
    pub theta: f64,
    pub tau: f64,
    pub sigma: f64,
    /// `|x_k - x_{k-1}|`.
    pub step_x: Option<f64>,
    /// `|y_k - y_{k-1}|`.
    pub step_y: Option<f64>,
}

impl MetricRecord {
    pub fn new(k: usize, sched: &ScheduleState, m: Metrics) -> Self {
        MetricRecord {
            k,
            gap: m.gap,
            dist_x: m.dist_x,
            dist_y: m.dist_y,
            tsa: m.tsa,
            theta: sched.theta,
            tau: sched.tau,
            sigma: sched.sigma,
            step_x: None,
            step_y: None,
        }
    }

    pub fn has_metrics(&self) -> bool {
        self.gap.is_some() || self.dist_x.is_some() || self.dist_y.is_some() || self.tsa.is_some()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub records: Vec<MetricRecord>,
}

impl RunReport {
    /// Records that carry at least one problem metric.
    pub fn with_metrics(&self) -> impl Iterator<Item = &MetricRecord> {
        self.records.iter().filter(|r| r.has_metrics())
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub state: SolverState,
    /// Parameters that the next step would use.
    pub schedule: ScheduleState,
    pub initial_schedule: ScheduleState,
    pub report: RunReport,
}

/// A failed run with everything recorded before the failure.
#[derive(Debug, Clone, thiserror::Error)]
#[error("run aborted at k = {}: {source}", .partial.records.len())]
pub struct RunError {
    pub source: Error,
    pub partial: RunReport,
}

/// Metric hook: sees the state after each step and the parameters that step used.
pub type Observer<'a> = dyn FnMut(&SolverState, &ScheduleState) -> Result<Metrics> + 'a;

/// Observer that records no problem metrics.
pub fn no_metrics(_: &SolverState, _: &ScheduleState) -> Result<Metrics> {
    Ok(Metrics::default())
}

/// Runs `max_iter` steps from `(x0, y0)`.
pub fn run<P: SaddleProblem + ?Sized>(
    p: &P,
    kind: &ScheduleKind,
    x0: &DVector<f64>,
    y0: &DVector<f64>,
    max_iter: usize,
    observer: &mut Observer<'_>,
) -> std::result::Result<RunOutput, RunError> {
    let fail = |e: Error, r: &RunReport| RunError { source: e, partial: r.clone() };
    let mut report = RunReport::default();
    let c = p.constants();
    let initial = make_schedule(kind, &c).map_err(|e| fail(e, &report))?;
    let mut sched = initial;
    let mut state = SolverState::new(p, x0, y0).map_err(|e| fail(e, &report))?;
    for _ in 0..max_iter {
        step(p, &mut state, &sched).map_err(|e| fail(e, &report))?;
        let m = observer(&state, &sched).map_err(|e| fail(e, &report))?;
        let mut rec = MetricRecord::new(state.k, &sched, m);
        rec.step_x = Some(state.last_step.0);
        rec.step_y = Some(state.last_step.1);
        report.records.push(rec);
        sched = schedule_advance(&sched, kind, &c);
    }
    Ok(RunOutput { state, schedule: sched, initial_schedule: initial, report })
}

/// `Psi(x_bar, y*) - Psi(x*, y_bar)`.
pub fn minimax_gap<P: SaddleProblem + ?Sized>(
    p: &P,
    saddle: (&DVector<f64>, &DVector<f64>),
    erg: (&DVector<f64>, &DVector<f64>),
) -> Result<f64> {
    p.minimax_gap(saddle, erg)
}

/// Measured quantity against its certified bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertificateCheck {
    pub kind: CertificateKind,
    pub k: usize,
    pub gap: f64,
    pub value: f64,
    pub bound: f64,
}

impl CertificateCheck {
    pub fn holds(&self, slack: f64) -> bool {
        self.value <= self.bound + slack
    }
}

/// Evaluates every certificate of the schedule at the current state.
pub fn gap_certificate<P: SaddleProblem + ?Sized>(
    p: &P,
    saddle: Option<(&DVector<f64>, &DVector<f64>)>,
    state: &SolverState,
    kind: &ScheduleKind,
    initial: &ScheduleState,
) -> Result<Vec<CertificateCheck>> {
    let saddle = saddle.ok_or(Error::MissingSaddlePoint)?;
    if state.k == 0 {
        return Err(Error::InvalidArgument("certificates need at least one step".into()));
    }
    let c = p.constants();
    let d0 = initial_distance(initial, saddle, (&state.x0, &state.y0));
    let gap = minimax_gap(p, saddle, state.ergodic())?;
    let k = state.k;
    let certs: Vec<RateCertificate> = certificates(kind, initial, &c, d0);
    Ok(certs
        .into_iter()
        .map(|cert| {
            let bound = cert.bound(k, state.weight_sum);
            let value = match cert.kind {
                CertificateKind::GapO1K | CertificateKind::GapO1K2 => gap,
                CertificateKind::IterateO1K => (&state.y - saddle.1).norm(),
                CertificateKind::Linear => {
                    let theta = cert.theta.unwrap_or(1.0);
                    theta * gap
                        + 0.5 * (saddle.0 - &state.x).norm_squared() / initial.tau
                        + 0.5 * (saddle.1 - &state.y).norm_squared() / initial.sigma_tilde(&c)
                }
            };
            CertificateCheck { kind: cert.kind, k, gap, value, bound }
        })
        .collect())
}
