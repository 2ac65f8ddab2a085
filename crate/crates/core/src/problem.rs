//! Saddle-point problem abstraction `Psi(x, y) = Phi(x, y) - g(y)`.

use nalgebra::DVector;
use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prox::{prox_oracle, OracleOptions};

/// Value in `R ∪ {-inf, +inf}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ExtendedReal {
    MinusInf,
    Finite(f64),
    PlusInf,
}

impl ExtendedReal {
    pub fn is_finite(self) -> bool {
        matches!(self, ExtendedReal::Finite(_))
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtendedReal::Finite(v) => Some(v),
            _ => None,
        }
    }

    pub fn scale(self, c: f64) -> ExtendedReal {
        match self {
            ExtendedReal::Finite(v) => ExtendedReal::Finite(c * v),
            other => other,
        }
    }

    /// `self - other` with `+inf - (+inf) = +inf`; `-inf - (-inf)` has no value.
    pub fn minus(self, other: ExtendedReal) -> Result<ExtendedReal> {
        use ExtendedReal::*;
        match (self, other) {
            (Finite(a), Finite(b)) => Ok(Finite(a - b)),
            (PlusInf, _) | (Finite(_), MinusInf) => Ok(PlusInf),
            (MinusInf, PlusInf) | (MinusInf, Finite(_)) | (Finite(_), PlusInf) => Ok(MinusInf),
            (MinusInf, MinusInf) => Err(Error::PsiUndefined("-inf - (-inf)".into())),
        }
    }
}

impl From<f64> for ExtendedReal {
    fn from(v: f64) -> Self {
        ExtendedReal::Finite(v)
    }
}

/// Lipschitz and strong-convexity constants of a problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemConstants {
    pub l_yx: f64,
    pub l_yy: f64,
    pub mu: f64,
    pub nu: f64,
}

impl ProblemConstants {
    pub fn new(l_yx: f64, l_yy: f64, mu: f64, nu: f64) -> Result<Self> {
        let c = ProblemConstants { l_yx, l_yy, mu, nu };
        c.check()?;
        Ok(c)
    }

    pub fn check(&self) -> Result<()> {
        for (name, v) in [("l_yx", self.l_yx), ("l_yy", self.l_yy), ("mu", self.mu), ("nu", self.nu)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidArgument(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        Ok(())
    }
}

/// A convex-concave saddle-point problem `min_x max_y Phi(x, y) - g(y)`.
///
/// Implementations are immutable after construction and `Sync`, so one
/// instance can be shared by concurrent runs.
pub trait SaddleProblem: Sync {
    fn dim_x(&self) -> usize;
    fn dim_y(&self) -> usize;
    fn constants(&self) -> ProblemConstants;

    /// Gradient of `Phi(x, .)` at `y`.
    fn grad_y(&self, x: &DVector<f64>, y: &DVector<f64>) -> Result<DVector<f64>>;

    /// Minimizer of `u -> tau Phi(u, y) + |u - x|^2 / 2`.
    fn prox_phi_x(&self, tau: f64, y: &DVector<f64>, x: &DVector<f64>) -> Result<DVector<f64>>;

    /// Minimizer of `w -> sigma g(w) + |w - v|^2 / 2`.
    fn prox_g(&self, sigma: f64, v: &DVector<f64>) -> Result<DVector<f64>>;

    /// `Phi(x, y)` for `y` in `dom g`; `+inf` when `x` lies outside the x-domain.
    fn phi_value(&self, x: &DVector<f64>, y: &DVector<f64>) -> ExtendedReal;

    /// `g(y)`, `+inf` outside `dom g`.
    fn g_value(&self, y: &DVector<f64>) -> ExtendedReal;

    /// `Psi(x, y)` with the usual extended-value convention.
    fn psi_value(&self, x: &DVector<f64>, y: &DVector<f64>) -> ExtendedReal {
        match self.phi_value(x, y) {
            ExtendedReal::PlusInf => ExtendedReal::PlusInf,
            ExtendedReal::MinusInf => ExtendedReal::MinusInf,
            ExtendedReal::Finite(p) => match self.g_value(y) {
                ExtendedReal::Finite(g) => ExtendedReal::Finite(p - g),
                _ => ExtendedReal::MinusInf,
            },
        }
    }

    /// `Psi(x_bar, y*) - Psi(x*, y_bar)`; problems with a closed form may
    /// override this to avoid cancellation.
    fn minimax_gap(
        &self,
        saddle: (&DVector<f64>, &DVector<f64>),
        erg: (&DVector<f64>, &DVector<f64>),
    ) -> Result<f64> {
        let a = self.psi_value(erg.0, saddle.1);
        let b = self.psi_value(saddle.0, erg.1);
        Ok(match a.minus(b)? {
            ExtendedReal::Finite(v) => v,
            ExtendedReal::PlusInf => f64::INFINITY,
            ExtendedReal::MinusInf => f64::NEG_INFINITY,
        })
    }

    /// Random point of `pr(dom Phi) x dom g`.
    fn sample_point(&self, rng: &mut dyn RngCore) -> (DVector<f64>, DVector<f64>);

    /// Orthogonal projector onto the direction space of the affine hull of
    /// the x-domain; identity when the domain is full-dimensional.
    fn tangent_x(&self, _d: &mut DVector<f64>) {}

    /// Same as [`SaddleProblem::tangent_x`] for `dom g`.
    fn tangent_y(&self, _d: &mut DVector<f64>) {}

    /// A saddle point, when known in closed form or by a direct solve.
    fn saddle_point(&self) -> Option<(DVector<f64>, DVector<f64>)> {
        None
    }

    /// Rejects starting points outside `pr(dom Phi) x dom g`.
    fn check_start(&self, x: &DVector<f64>, y: &DVector<f64>) -> Result<()> {
        if x.len() != self.dim_x() || y.len() != self.dim_y() {
            return Err(Error::Dimension(format!(
                "start has dims ({}, {}), problem has ({}, {})",
                x.len(),
                y.len(),
                self.dim_x(),
                self.dim_y()
            )));
        }
        if !self.g_value(y).is_finite() {
            return Err(Error::InfeasibleStart("y0 outside dom g".into()));
        }
        if !self.phi_value(x, y).is_finite() {
            return Err(Error::InfeasibleStart("x0 outside the x-domain".into()));
        }
        Ok(())
    }
}

/// Outcome of [`validate_problem`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub trials: usize,
    /// Largest relative excess of `|grad(x,y) - grad(x',y')|` over the Lipschitz bound.
    pub lipschitz_violation: f64,
    /// Largest prox-oracle violation for `prox_phi_x`.
    pub prox_x_violation: f64,
    /// Largest prox-oracle violation for `prox_g`.
    pub prox_g_violation: f64,
    pub tolerance: f64,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.lipschitz_violation <= self.tolerance
            && self.prox_x_violation <= self.tolerance
            && self.prox_g_violation <= self.tolerance
    }
}

/// Perturbation samples per prox triple inside [`validate_problem`].
pub const VALIDATION_ORACLE_SAMPLES: usize = 30;

/// Spot-checks the Lipschitz bound on `grad_y` and the optimality of both proxes.
pub fn validate_problem<P: SaddleProblem + ?Sized>(p: &P, trials: usize, seed: u64) -> Result<ValidationReport> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be positive".into()));
    }
    let c = p.constants();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut lip = 0.0_f64;
    for _ in 0..trials {
        let (x, y) = p.sample_point(&mut rng);
        let (x2, y2) = p.sample_point(&mut rng);
        let lhs = (p.grad_y(&x, &y)? - p.grad_y(&x2, &y2)?).norm();
        let rhs = c.l_yx * (&x - &x2).norm() + c.l_yy * (&y - &y2).norm();
        let excess = (lhs - rhs).max(0.0) / rhs.max(lhs).max(f64::MIN_POSITIVE);
        lip = lip.max(excess);
    }

    let opts = OracleOptions { trials: VALIDATION_ORACLE_SAMPLES, ..OracleOptions::default() };
    let mut vx = f64::NEG_INFINITY;
    let mut vg = f64::NEG_INFINITY;
    for t in 0..trials {
        let (x, y) = p.sample_point(&mut rng);
        let (x2, y2) = p.sample_point(&mut rng);
        let tau = 10f64.powf(rand_exponent(&mut rng));
        let scale = 1.0 + 4.0 * unit(&mut rng);
        let xin = &x + (&x2 - &x) * scale;
        let cand = p.prox_phi_x(tau, &y, &xin)?;
        let f = |u: &DVector<f64>| p.phi_value(u, &y).scale(tau);
        let tangent = |d: &mut DVector<f64>| p.tangent_x(d);
        vx = vx.max(prox_oracle(&f, &xin, &cand, &opts.with_seed(seed ^ (2 * t as u64 + 1)), Some(&tangent))?);

        let sigma = 10f64.powf(rand_exponent(&mut rng));
        let vin = &y + (&y2 - &y) * scale;
        let cand = p.prox_g(sigma, &vin)?;
        let f = |w: &DVector<f64>| p.g_value(w).scale(sigma);
        let tangent = |d: &mut DVector<f64>| p.tangent_y(d);
        vg = vg.max(prox_oracle(&f, &vin, &cand, &opts.with_seed(seed ^ (2 * t as u64 + 2)), Some(&tangent))?);
    }
    Ok(ValidationReport {
        trials,
        lipschitz_violation: lip,
        prox_x_violation: vx,
        prox_g_violation: vg,
        tolerance: 1e-8,
    })
}

fn unit(rng: &mut dyn RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

/// Exponent in [-2, 1] for step sizes.
fn rand_exponent(rng: &mut dyn RngCore) -> f64 {
    -2.0 + 3.0 * unit(rng)
}
