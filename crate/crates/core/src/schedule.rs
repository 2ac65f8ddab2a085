//! Step-size schedules and the rate certificates they carry.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::ProblemConstants;

/// Upper bound on `sigma_0 nu` for the adaptive schedule.
pub fn adaptive_sigma_bound(nu: f64) -> f64 {
    (9.0 + 3.0 * 13f64.sqrt()) / (2.0 * nu)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ScheduleKind {
    /// Constant `tau`, `sigma`, `theta = 1`.
    ConstantCC { tau: f64, sigma: f64, c_alpha: f64 },
    /// `theta_{k+1} = 1/sqrt(1 + nu sigma_k)`, `tau_{k+1} = tau_k/theta_{k+1}`, `sigma_{k+1} = theta_{k+1} sigma_k`.
    AdaptiveCSC { tau0: f64, sigma0: f64, c_alpha: f64 },
    /// Constant `theta` with `tau = (1-theta)/(mu theta)`, `sigma = (1-theta)/(nu theta)`.
    LinearSCSC { theta: f64, alpha: f64 },
}

/// `c_alpha = 2 L_yx`, or 1 when `L_yx = 0`.
pub fn default_c_alpha(c: &ProblemConstants) -> f64 {
    if c.l_yx > 0.0 {
        2.0 * c.l_yx
    } else {
        1.0
    }
}

/// `tau_0 = 1 / max(L_yx, 1)`.
pub fn default_tau0(c: &ProblemConstants) -> f64 {
    1.0 / c.l_yx.max(1.0)
}

/// `sigma_0 = 0.9 / (c_alpha L_yx tau_0 + 2 L_yy)`, capped by the adaptive bound when `nu > 0`.
pub fn default_sigma0(c: &ProblemConstants, tau0: f64, c_alpha: f64) -> f64 {
    let denom = c_alpha * c.l_yx * tau0 + 2.0 * c.l_yy;
    let mut s = if denom > 0.0 { 0.9 / denom } else { 1.0 };
    if c.nu > 0.0 {
        s = s.min(adaptive_sigma_bound(c.nu));
    }
    s
}

/// `tau_0 = 0.9 / (c_alpha L_yx sigma_0)` for a prescribed `sigma_0`, when `L_yy = 0`.
pub fn tau_for_sigma(c: &ProblemConstants, sigma0: f64, c_alpha: f64) -> Result<f64> {
    let rest = 1.0 - 2.0 * c.l_yy * sigma0;
    if rest <= 0.0 {
        return Err(Error::StepSizeViolation(format!("2 L_yy sigma0 = {} >= 1", 2.0 * c.l_yy * sigma0)));
    }
    if c.l_yx == 0.0 {
        return Ok(1.0);
    }
    Ok(0.9 * rest / (c_alpha * c.l_yx * sigma0))
}

/// `max{ L_yx/(alpha mu + L_yx), (alpha L_yx + 2 L_yy)/(nu + alpha L_yx + 2 L_yy) }`.
pub fn theta_tilde(c: &ProblemConstants, alpha: f64) -> f64 {
    let a = if c.l_yx > 0.0 { c.l_yx / (alpha * c.mu + c.l_yx) } else { 0.0 };
    let num = alpha * c.l_yx + 2.0 * c.l_yy;
    let b = if num > 0.0 { num / (c.nu + num) } else { 0.0 };
    a.max(b)
}

/// `alpha` equalizing the two terms of `theta_tilde`, found by bisection in `log alpha`.
pub fn balanced_alpha(c: &ProblemConstants) -> f64 {
    if c.l_yx == 0.0 {
        return 1.0;
    }
    let first = |a: f64| c.l_yx / (a * c.mu + c.l_yx);
    let second = |a: f64| {
        let num = a * c.l_yx + 2.0 * c.l_yy;
        num / (c.nu + num)
    };
    let (mut lo, mut hi) = (-40.0_f64, 40.0_f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let a = mid.exp();
        if first(a) > second(a) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (0.5 * (lo + hi)).exp()
}

impl ScheduleKind {
    /// Constant schedule from the default `c_alpha` and an optional `tau`.
    pub fn constant(c: &ProblemConstants, tau: Option<f64>, sigma: Option<f64>) -> Result<Self> {
        let c_alpha = default_c_alpha(c);
        let (tau, sigma) = resolve_pair(c, tau, sigma, c_alpha)?;
        Ok(ScheduleKind::ConstantCC { tau, sigma, c_alpha })
    }

    /// Adaptive schedule from the default `c_alpha` and optional initial step sizes.
    pub fn adaptive(c: &ProblemConstants, tau0: Option<f64>, sigma0: Option<f64>) -> Result<Self> {
        let c_alpha = default_c_alpha(c);
        let (tau0, sigma0) = resolve_pair(c, tau0, sigma0, c_alpha)?;
        Ok(ScheduleKind::AdaptiveCSC { tau0, sigma0, c_alpha })
    }

    /// Linear schedule with balanced `alpha` and `theta = (1 + theta_tilde)/2` unless given.
    pub fn linear(c: &ProblemConstants, theta: Option<f64>) -> Self {
        let alpha = balanced_alpha(c);
        let theta = theta.unwrap_or_else(|| 0.5 * (1.0 + theta_tilde(c, alpha)));
        ScheduleKind::LinearSCSC { theta, alpha }
    }
}

fn resolve_pair(c: &ProblemConstants, tau: Option<f64>, sigma: Option<f64>, c_alpha: f64) -> Result<(f64, f64)> {
    Ok(match (tau, sigma) {
        (Some(t), Some(s)) => (t, s),
        (Some(t), None) => (t, default_sigma0(c, t, c_alpha)),
        (None, Some(s)) => (tau_for_sigma(c, s, c_alpha)?, s),
        (None, None) => {
            let t = default_tau0(c);
            (t, default_sigma0(c, t, c_alpha))
        }
    })
}

/// Parameters in force at iteration `k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduleState {
    pub k: usize,
    pub theta: f64,
    pub tau: f64,
    pub sigma: f64,
    /// Ergodic weight `t_k`.
    pub t: f64,
    /// `t_0 + ... + t_k`.
    pub t_sum: f64,
    /// `alpha_k`; constant for the linear schedule.
    pub alpha: f64,
    /// Margin in the step-size assumption; for the linear schedule
    /// `1 - theta sigma (alpha L_yx + L_yy)`.
    pub delta: f64,
    pub tau0: f64,
    pub sigma0: f64,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} must be positive and finite, got {v}")))
    }
}

fn product_condition(c: &ProblemConstants, tau: f64, sigma: f64, c_alpha: f64) -> Result<f64> {
    if !(c_alpha > c.l_yx) {
        return Err(Error::StepSizeViolation(format!("c_alpha = {c_alpha} must exceed L_yx = {}", c.l_yx)));
    }
    let prod = (c_alpha * c.l_yx * tau + 2.0 * c.l_yy) * sigma;
    if !(prod < 1.0) {
        return Err(Error::StepSizeViolation(format!(
            "(c_alpha L_yx tau + 2 L_yy) sigma = {prod} must be < 1"
        )));
    }
    Ok((1.0 - c.l_yx / c_alpha).min(1.0 - prod))
}

/// Initial schedule state; validates `kind` against the problem constants.
pub fn make_schedule(kind: &ScheduleKind, c: &ProblemConstants) -> Result<ScheduleState> {
    c.check()?;
    match *kind {
        ScheduleKind::ConstantCC { tau, sigma, c_alpha } => {
            positive("tau", tau)?;
            positive("sigma", sigma)?;
            positive("c_alpha", c_alpha)?;
            let delta = product_condition(c, tau, sigma, c_alpha)?;
            Ok(ScheduleState {
                k: 0,
                theta: 1.0,
                tau,
                sigma,
                t: 1.0,
                t_sum: 1.0,
                alpha: c_alpha * tau,
                delta,
                tau0: tau,
                sigma0: sigma,
            })
        }
        ScheduleKind::AdaptiveCSC { tau0, sigma0, c_alpha } => {
            positive("tau0", tau0)?;
            positive("sigma0", sigma0)?;
            positive("c_alpha", c_alpha)?;
            if !(c.nu > 0.0) {
                return Err(Error::StepSizeViolation("adaptive schedule requires nu > 0".into()));
            }
            let bound = adaptive_sigma_bound(c.nu);
            if sigma0 > bound {
                return Err(Error::StepSizeViolation(format!(
                    "sigma0 = {sigma0} exceeds (9 + 3 sqrt 13)/(2 nu) = {bound}"
                )));
            }
            let delta = product_condition(c, tau0, sigma0, c_alpha)?;
            Ok(ScheduleState {
                k: 0,
                theta: 1.0,
                tau: tau0,
                sigma: sigma0,
                t: 1.0,
                t_sum: 1.0,
                alpha: c_alpha * tau0,
                delta,
                tau0,
                sigma0,
            })
        }
        ScheduleKind::LinearSCSC { theta, alpha } => {
            positive("alpha", alpha)?;
            if !(c.mu > 0.0 && c.nu > 0.0) {
                return Err(Error::StepSizeViolation("linear schedule requires mu > 0 and nu > 0".into()));
            }
            let tt = theta_tilde(c, alpha);
            if !(theta > tt && theta < 1.0) {
                return Err(Error::StepSizeViolation(format!(
                    "theta = {theta} must satisfy theta_tilde = {tt} < theta < 1"
                )));
            }
            let tau = (1.0 - theta) / (c.mu * theta);
            let sigma = (1.0 - theta) / (c.nu * theta);
            let delta = 1.0 - theta * sigma * (alpha * c.l_yx + c.l_yy);
            if !(delta > 0.0) || c.l_yx / alpha > 1.0 / tau * (1.0 + 1e-12) || c.l_yy * sigma > delta * (1.0 + 1e-12) {
                return Err(Error::StepSizeViolation(format!(
                    "linear step sizes tau = {tau}, sigma = {sigma} violate the assumption for alpha = {alpha}"
                )));
            }
            Ok(ScheduleState {
                k: 0,
                theta,
                tau,
                sigma,
                t: 1.0,
                t_sum: 1.0,
                alpha,
                delta,
                tau0: tau,
                sigma0: sigma,
            })
        }
    }
}

/// Parameters for iteration `k + 1`.
pub fn schedule_advance(s: &ScheduleState, kind: &ScheduleKind, c: &ProblemConstants) -> ScheduleState {
    let mut n = *s;
    n.k = s.k + 1;
    match *kind {
        ScheduleKind::ConstantCC { c_alpha, .. } => {
            n.alpha = c_alpha * s.tau;
        }
        ScheduleKind::AdaptiveCSC { c_alpha, .. } => {
            let theta = 1.0 / (1.0 + c.nu * s.sigma).sqrt();
            n.theta = theta;
            n.tau = s.tau / theta;
            n.sigma = theta * s.sigma;
            n.t = n.tau / s.tau0;
            n.alpha = c_alpha * s.tau;
        }
        ScheduleKind::LinearSCSC { theta, .. } => {
            n.t = s.t / theta;
        }
    }
    n.t_sum = s.t_sum + n.t;
    n
}

impl ScheduleState {
    /// `alpha_{k+1}`.
    pub fn alpha_next(&self, kind: &ScheduleKind) -> f64 {
        match *kind {
            ScheduleKind::ConstantCC { c_alpha, .. } | ScheduleKind::AdaptiveCSC { c_alpha, .. } => c_alpha * self.tau,
            ScheduleKind::LinearSCSC { alpha, .. } => alpha,
        }
    }

    /// Slack of the two step-size inequalities at this iteration:
    /// `(1-delta)/tau_k - L_yx/alpha_{k+1}` and
    /// `(1-delta)/sigma_k - L_yx alpha_k theta_k - L_yy (1 + theta_k)`.
    /// For the linear schedule: `1/tau - L_yx/alpha` and `1/sigma_tilde - L_yy`.
    pub fn assumption_slack(&self, kind: &ScheduleKind, c: &ProblemConstants) -> (f64, f64) {
        if let ScheduleKind::LinearSCSC { alpha, .. } = *kind {
            let a1 = 1.0 / self.tau - if c.l_yx > 0.0 { c.l_yx / alpha } else { 0.0 };
            return (a1, 1.0 / self.sigma_tilde(c) - c.l_yy);
        }
        let a1 = (1.0 - self.delta) / self.tau - c.l_yx / self.alpha_next(kind);
        let a2 = (1.0 - self.delta) / self.sigma - c.l_yx * self.alpha * self.theta - c.l_yy * (1.0 + self.theta);
        (a1, a2)
    }

    /// `sigma / (1 - theta sigma (alpha L_yx + L_yy))`.
    pub fn sigma_tilde(&self, c: &ProblemConstants) -> f64 {
        self.sigma / (1.0 - self.theta * self.sigma * (self.alpha * c.l_yx + c.l_yy))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CertificateKind {
    /// `gap_K <= d0 / T_K`.
    GapO1K,
    /// `gap_K <= constant d0 / K^2`, `K >= 2`.
    GapO1K2,
    /// `|y_K - y*| <= constant sqrt(d0) / K`.
    IterateO1K,
    /// `theta gap + |x*-x_K|^2/(2 tau) + |y*-y_K|^2/(2 sigma_tilde) <= theta^K d0`.
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateCertificate {
    pub kind: CertificateKind,
    pub constant: f64,
    pub theta: Option<f64>,
    pub d0: f64,
}

/// `|x* - x0|^2/(2 tau0) + |y* - y0|^2/(2 sigma0)`.
pub fn initial_distance(
    s0: &ScheduleState,
    saddle: (&nalgebra::DVector<f64>, &nalgebra::DVector<f64>),
    start: (&nalgebra::DVector<f64>, &nalgebra::DVector<f64>),
) -> f64 {
    0.5 * (saddle.0 - start.0).norm_squared() / s0.tau0 + 0.5 * (saddle.1 - start.1).norm_squared() / s0.sigma0
}

/// Certificates implied by `kind`, built from the initial state and `d0`.
pub fn certificates(kind: &ScheduleKind, s0: &ScheduleState, c: &ProblemConstants, d0: f64) -> Vec<RateCertificate> {
    match kind {
        ScheduleKind::ConstantCC { .. } => vec![RateCertificate { kind: CertificateKind::GapO1K, constant: 1.0, theta: None, d0 }],
        ScheduleKind::AdaptiveCSC { .. } => vec![
            RateCertificate {
                kind: CertificateKind::GapO1K2,
                constant: 12.0 / (c.nu * s0.sigma0),
                theta: None,
                d0,
            },
            RateCertificate {
                kind: CertificateKind::IterateO1K,
                constant: (18.0 / (c.nu * c.nu * s0.sigma0 * s0.delta)).sqrt(),
                theta: None,
                d0,
            },
        ],
        ScheduleKind::LinearSCSC { theta, .. } => {
            vec![RateCertificate { kind: CertificateKind::Linear, constant: 1.0, theta: Some(*theta), d0 }]
        }
    }
}

impl RateCertificate {
    /// Right-hand side at iteration `k`; `t_total` is `T_K` for the `O(1/K)` gap bound.
    pub fn bound(&self, k: usize, t_total: f64) -> f64 {
        let kf = k as f64;
        match self.kind {
            CertificateKind::GapO1K => self.constant * self.d0 / t_total,
            CertificateKind::GapO1K2 => self.constant * self.d0 / (kf * kf),
            CertificateKind::IterateO1K => self.constant * self.d0.sqrt() / kf,
            CertificateKind::Linear => self.theta.unwrap_or(1.0).powi(k as i32) * self.d0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn consts(l_yx: f64, l_yy: f64, mu: f64, nu: f64) -> ProblemConstants {
        ProblemConstants::new(l_yx, l_yy, mu, nu).unwrap()
    }

    #[test]
    fn constant_example() {
        let c = consts(1.0, 0.0, 0.0, 0.0);
        let k = ScheduleKind::ConstantCC { tau: 0.3, sigma: 0.5, c_alpha: 2.0 };
        let s = make_schedule(&k, &c).unwrap();
        assert!((s.delta - 0.5).abs() < 1e-15);
        assert_eq!(s.theta, 1.0);
        assert!((s.alpha - 0.6).abs() < 1e-15);
        let n = schedule_advance(&s, &k, &c);
        assert_eq!((n.theta, n.tau, n.sigma, n.t), (1.0, 0.3, 0.5, 1.0));
        assert_eq!(n.t_sum, 2.0);
        assert_eq!(n.k, 1);
    }

    #[test]
    fn adaptive_first_step() {
        let c = consts(0.0, 0.0, 0.0, 1.0);
        let k = ScheduleKind::AdaptiveCSC { tau0: 1.0, sigma0: 1.0, c_alpha: 1.0 };
        let s = make_schedule(&k, &c).unwrap();
        let n = schedule_advance(&s, &k, &c);
        let r2 = 2f64.sqrt();
        assert!((n.theta - 1.0 / r2).abs() < 1e-15);
        assert!((n.tau - r2).abs() < 1e-15);
        assert!((n.sigma - 1.0 / r2).abs() < 1e-15);
        assert!((n.t - r2).abs() < 1e-15);
    }

    #[test]
    fn rejections() {
        let c = consts(1.0, 0.0, 0.0, 0.0);
        let k = ScheduleKind::AdaptiveCSC { tau0: 0.1, sigma0: 0.1, c_alpha: 2.0 };
        assert!(matches!(make_schedule(&k, &c), Err(Error::StepSizeViolation(_))));
        let k = ScheduleKind::ConstantCC { tau: 1.0, sigma: 1.0, c_alpha: 2.0 };
        assert!(matches!(make_schedule(&k, &c), Err(Error::StepSizeViolation(_))));
        let k = ScheduleKind::ConstantCC { tau: 0.1, sigma: 0.1, c_alpha: 1.0 };
        assert!(matches!(make_schedule(&k, &c), Err(Error::StepSizeViolation(_))));
        let c = consts(1.0, 0.5, 1.0, 1.0);
        let alpha = 0.7;
        let k = ScheduleKind::LinearSCSC { theta: theta_tilde(&c, alpha), alpha };
        assert!(matches!(make_schedule(&k, &c), Err(Error::StepSizeViolation(_))));
        let c = consts(1.0, 0.0, 0.0, 10.0);
        let k = ScheduleKind::AdaptiveCSC { tau0: 1e-3, sigma0: 1.0, c_alpha: 2.0 };
        assert!(matches!(make_schedule(&k, &c), Err(Error::StepSizeViolation(_))));
    }

    #[test]
    fn balanced_alpha_equalizes() {
        let c = consts(1.3, 0.4, 0.7, 2.0);
        let a = balanced_alpha(&c);
        let t1 = c.l_yx / (a * c.mu + c.l_yx);
        let t2 = (a * c.l_yx + 2.0 * c.l_yy) / (c.nu + a * c.l_yx + 2.0 * c.l_yy);
        assert!((t1 - t2).abs() < 1e-12);
        for f in [0.5, 0.9, 1.1, 2.0] {
            assert!(theta_tilde(&c, a * f) >= theta_tilde(&c, a) - 1e-14);
        }
    }
}
