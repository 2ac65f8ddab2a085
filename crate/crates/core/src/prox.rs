//! Proximal operators, projections and a sampling-based prox checker.

use std::sync::Mutex;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::problem::ExtendedReal;
use crate::qp::{ActiveSetSolver, QpOptions, QpProblem, WarmStart};

/// Slack allowed when testing membership of closed sets.
pub const FEAS_TOL: f64 = 1e-8;

/// Membership tolerance for extended-value evaluation of indicator terms.
pub const DOMAIN_TOL: f64 = 1e-12;

fn check_finite(v: &DVector<f64>) -> Result<()> {
    if v.is_empty() {
        return Err(Error::InvalidArgument("empty vector".into()));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument("non-finite entry".into()));
    }
    Ok(())
}

/// Euclidean projection onto the unit simplex (sort and threshold).
pub fn project_simplex(v: &DVector<f64>) -> Result<DVector<f64>> {
    check_finite(v)?;
    let mut u: Vec<f64> = v.iter().copied().collect();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (j, &uj) in u.iter().enumerate() {
        cum += uj;
        let t = (cum - 1.0) / (j + 1) as f64;
        if uj - t > 0.0 {
            theta = t;
        }
    }
    Ok(v.map(|x| (x - theta).max(0.0)))
}

/// True if `u` lies in the unit simplex up to `tol`.
pub fn in_simplex(u: &DVector<f64>, tol: f64) -> bool {
    u.iter().all(|&x| x >= -tol) && (u.sum() - 1.0).abs() <= tol
}

/// `{ y : lower <= y <= upper, <normal, y> = offset }`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxHyperplaneSet {
    pub lower: f64,
    pub upper: f64,
    pub normal: DVector<f64>,
    pub offset: f64,
}

impl BoxHyperplaneSet {
    /// Checks `lower < upper`, `normal != 0` and that the hyperplane meets the box.
    pub fn new(lower: f64, upper: f64, normal: DVector<f64>, offset: f64) -> Result<Self> {
        if !(lower < upper) || lower.is_nan() || !lower.is_finite() {
            return Err(Error::InvalidArgument(format!("need finite lower < upper, got [{lower}, {upper}]")));
        }
        check_finite(&normal)?;
        if normal.iter().all(|&b| b == 0.0) {
            return Err(Error::InvalidArgument("hyperplane normal is zero".into()));
        }
        let (mut lo, mut hi) = (0.0, 0.0);
        for &b in normal.iter() {
            let (a, c) = (b * lower, b * upper);
            lo += a.min(c);
            hi += a.max(c);
        }
        if !(lo - FEAS_TOL <= offset && offset <= hi + FEAS_TOL) {
            return Err(Error::InvalidArgument(format!("hyperplane misses the box: offset {offset} outside [{lo}, {hi}]")));
        }
        Ok(BoxHyperplaneSet { lower, upper, normal, offset })
    }

    pub fn dim(&self) -> usize {
        self.normal.len()
    }

    pub fn contains(&self, y: &DVector<f64>, tol: f64) -> bool {
        y.len() == self.dim()
            && y.iter().all(|&v| v >= self.lower - tol && v <= self.upper + tol)
            && (y.dot(&self.normal) - self.offset).abs() <= tol * (1.0 + self.normal.amax() * y.len() as f64)
    }

    fn clipped(&self, v: &DVector<f64>, lambda: f64) -> DVector<f64> {
        v.zip_map(&self.normal, |vi, bi| (vi - lambda * bi).clamp(self.lower, self.upper))
    }

    fn residual(&self, v: &DVector<f64>, lambda: f64) -> f64 {
        let mut s = 0.0;
        for i in 0..v.len() {
            s += self.normal[i] * (v[i] - lambda * self.normal[i]).clamp(self.lower, self.upper);
        }
        s - self.offset
    }

    /// Projects the tangent direction `d` onto `{ <normal, d> = 0 }`.
    pub fn tangent(&self, d: &mut DVector<f64>) {
        let c = d.dot(&self.normal) / self.normal.norm_squared();
        d.axpy(-c, &self.normal, 1.0);
    }
}

/// Euclidean projection onto a box intersected with a hyperplane, by
/// bisection on the scalar multiplier of the hyperplane constraint.
pub fn project_box_hyperplane(s: &BoxHyperplaneSet, v: &DVector<f64>) -> Result<DVector<f64>> {
    check_finite(v)?;
    if v.len() != s.dim() {
        return Err(Error::Dimension(format!("vector has length {}, set has dimension {}", v.len(), s.dim())));
    }
    let tol = 1e-12;
    let mut width = 1.0 + v.amax();
    let (mut lo, mut hi) = (-width, width);
    let mut expand = 0;
    while s.residual(v, lo) < 0.0 || s.residual(v, hi) > 0.0 {
        width *= 2.0;
        lo = -width;
        hi = width;
        expand += 1;
        if expand > 200 {
            return Err(Error::Numerical("could not bracket the hyperplane multiplier".into()));
        }
    }
    let mut lambda = 0.5 * (lo + hi);
    let mut converged = false;
    for _ in 0..200 {
        lambda = 0.5 * (lo + hi);
        let r = s.residual(v, lambda);
        if r.abs() <= tol {
            converged = true;
            break;
        }
        if r > 0.0 {
            lo = lambda;
        } else {
            hi = lambda;
        }
        if hi - lo <= f64::EPSILON * lambda.abs().max(1.0) {
            break;
        }
    }
    // exact solve on the piece where the free set is fixed
    let mut num = -s.offset;
    let mut den = 0.0;
    for i in 0..v.len() {
        let w = v[i] - lambda * s.normal[i];
        if w > s.lower && w < s.upper {
            num += s.normal[i] * v[i];
            den += s.normal[i] * s.normal[i];
        } else {
            num += s.normal[i] * w.clamp(s.lower, s.upper);
        }
    }
    if den > 0.0 {
        let exact = num / den;
        if s.residual(v, exact).abs() < s.residual(v, lambda).abs() {
            lambda = exact;
        }
    }
    let r = s.residual(v, lambda).abs();
    if !converged && r > tol * (1.0 + v.len() as f64) {
        return Err(Error::Numerical(format!("hyperplane residual {r:.3e} after 200 bisection steps")));
    }
    Ok(s.clipped(v, lambda))
}

/// Polyhedral cone `{ y : A y >= 0 }`.
#[derive(Debug)]
pub struct PolytopeSet {
    a: DMatrix<f64>,
    warm: Mutex<Option<ActiveSetSolver>>,
}

impl Clone for PolytopeSet {
    fn clone(&self) -> Self {
        PolytopeSet::new(self.a.clone())
    }
}

impl PolytopeSet {
    pub fn new(a: DMatrix<f64>) -> Self {
        PolytopeSet { a, warm: Mutex::new(None) }
    }

    pub fn a_matrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn contains(&self, y: &DVector<f64>, tol: f64) -> bool {
        let ay = &self.a * y;
        ay.iter().all(|&v| v >= -tol * (1.0 + y.amax()))
    }
}

/// Euclidean projection onto `{ A y >= 0 }` through the active-set QP solver.
///
/// The solver of the previous call is reused, so consecutive projections of
/// nearby points start from the previous solution.
pub fn project_polytope(s: &PolytopeSet, v: &DVector<f64>) -> Result<DVector<f64>> {
    check_finite(v)?;
    let n = s.a.ncols();
    if v.len() != n {
        return Err(Error::Dimension(format!("vector has length {}, set has dimension {n}", v.len())));
    }
    let av = &s.a * v;
    if av.iter().all(|&x| x >= 0.0) {
        return Ok(v.clone());
    }
    let mut guard = s.warm.lock().unwrap_or_else(|e| e.into_inner());
    if guard.is_none() {
        let qp = QpProblem::new(DMatrix::identity(n, n), -v)
            .with_inequalities(s.a.clone(), DVector::zeros(s.a.nrows()));
        let mut solver = ActiveSetSolver::new(qp, QpOptions::default())?;
        solver.warm_start(&WarmStart { point: DVector::zeros(n), working_set: Vec::new() })?;
        *guard = Some(solver);
    }
    let solver = guard.as_mut().expect("initialized above");
    solver.set_linear_term(-v)?;
    match solver.solve() {
        Ok(sol) => sol.into_optimal(),
        Err(e) => {
            *guard = None;
            Err(e)
        }
    }
}

/// `prox_{tau w max(0, .)}(x)` for scalar `x`.
pub fn prox_positive_part_scaled(tau: f64, w: f64, x: f64) -> Result<f64> {
    if w < 0.0 {
        return Err(Error::InvalidArgument(format!("coefficient w = {w} must be nonnegative")));
    }
    if !(tau >= 0.0) {
        return Err(Error::InvalidArgument(format!("tau = {tau} must be nonnegative")));
    }
    Ok(if x <= 0.0 {
        x
    } else if x <= tau * w {
        0.0
    } else {
        x - tau * w
    })
}

/// Settings for [`prox_oracle`].
#[derive(Debug, Clone, PartialEq)]
pub struct OracleOptions {
    pub trials: usize,
    pub seed: u64,
    pub scales: Vec<f64>,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions { trials: 1000, seed: 0, scales: vec![1e-3, 1e-1, 1.0] }
    }
}

impl OracleOptions {
    pub fn with_seed(&self, seed: u64) -> Self {
        OracleOptions { seed, ..self.clone() }
    }
}

/// Largest value of `[f(c) + |c-x|^2/2] - [f(u) + |u-x|^2/2]` over random
/// points `u` near the candidate `c`; a true prox gives a value `<= 0` up to
/// rounding.
///
/// Perturbations are Gaussian with norm of the order of each scale, cycled
/// through `opts.scales`. `tangent` restricts them to the direction space of
/// an affine domain. A perturbed point with `f(u) = +inf` is pulled back
/// along the segment to `c` onto the domain boundary by bisection.
pub fn prox_oracle(
    f: &dyn Fn(&DVector<f64>) -> ExtendedReal,
    x: &DVector<f64>,
    candidate: &DVector<f64>,
    opts: &OracleOptions,
    tangent: Option<&dyn Fn(&mut DVector<f64>)>,
) -> Result<f64> {
    if opts.trials == 0 || opts.scales.is_empty() {
        return Err(Error::InvalidArgument("oracle needs trials > 0 and at least one scale".into()));
    }
    if x.len() != candidate.len() {
        return Err(Error::Dimension("candidate and x differ in length".into()));
    }
    let value = |u: &DVector<f64>| -> Result<ExtendedReal> {
        match f(u) {
            ExtendedReal::MinusInf => Err(Error::ProxUndefined),
            ExtendedReal::Finite(v) => Ok(ExtendedReal::Finite(v + 0.5 * (u - x).norm_squared())),
            ExtendedReal::PlusInf => Ok(ExtendedReal::PlusInf),
        }
    };
    let base = match value(candidate)? {
        ExtendedReal::Finite(v) => v,
        _ => return Ok(f64::INFINITY),
    };
    let n = x.len();
    let mut rng = ChaCha20Rng::seed_from_u64(opts.seed);
    let mut worst = f64::NEG_INFINITY;
    for t in 0..opts.trials {
        let scale = opts.scales[t % opts.scales.len()];
        let mut d = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
        if let Some(proj) = tangent {
            proj(&mut d);
        }
        let dn = d.norm();
        if dn == 0.0 {
            continue;
        }
        d *= scale / dn;
        let mut u = candidate + &d;
        let mut val = value(&u)?;
        if val == ExtendedReal::PlusInf {
            let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
            for _ in 0..50 {
                let mid = 0.5 * (lo + hi);
                if value(&(candidate + &d * mid))?.is_finite() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            if lo == 0.0 {
                continue;
            }
            u = candidate + &d * lo;
            val = value(&u)?;
        }
        if let ExtendedReal::Finite(v) = val {
            worst = worst.max(base - v);
        }
    }
    Ok(worst)
}
