use nalgebra::{DMatrix, DVector};
use rand::{Rng, RngCore};

use crate::error::{Error, Result};
use crate::linalg::{lipschitz_norm, positive_part};
use crate::problem::{ExtendedReal, ProblemConstants, SaddleProblem};
use crate::prox::{project_polytope, prox_positive_part_scaled, PolytopeSet, DOMAIN_TOL};
use crate::qp::{solve_qp_from, QpOptions, QpProblem, WarmStart};

/// `Phi(x, y) = <[x]_+, A y>`, `g(y) = delta_C(y) + nu/2 |y|^2` with `C = { A y >= 0 }`.
#[derive(Debug, Clone)]
pub struct ToyProblem {
    a: DMatrix<f64>,
    nu: f64,
    l_yx: f64,
    cone: PolytopeSet,
}

impl ToyProblem {
    /// Requires `A` (d x n) to have full row rank.
    pub fn new(a: DMatrix<f64>, nu: f64) -> Result<Self> {
        if !(nu >= 0.0 && nu.is_finite()) {
            return Err(Error::InvalidArgument(format!("nu = {nu} must be >= 0")));
        }
        if a.nrows() == 0 || a.nrows() > a.ncols() {
            return Err(Error::RankDeficient(format!("A is {}x{}, need 0 < d <= n", a.nrows(), a.ncols())));
        }
        let sv = a.singular_values();
        let (smin, smax) = (sv.min(), sv.max());
        if !(smin > 1e-8 * smax) {
            return Err(Error::RankDeficient(format!("smallest singular value {smin:.3e} vs largest {smax:.3e}")));
        }
        let l_yx = lipschitz_norm(&a);
        Ok(ToyProblem { cone: PolytopeSet::new(a.clone()), a, nu, l_yx })
    }

    /// Entries uniform on `[-3, 3]`; redrawn until `A` has full row rank.
    pub fn random(d: usize, n: usize, nu: f64, rng: &mut dyn RngCore) -> Result<Self> {
        for _ in 0..100 {
            let a = DMatrix::from_fn(d, n, |_, _| rng.random_range(-3.0..=3.0));
            match ToyProblem::new(a, nu) {
                Err(Error::RankDeficient(_)) => continue,
                other => return other,
            }
        }
        Err(Error::RankDeficient("no full-rank draw in 100 attempts".into()))
    }

    pub fn a_matrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn cone(&self) -> &PolytopeSet {
        &self.cone
    }

    fn in_cone(&self, y: &DVector<f64>) -> bool {
        self.cone.contains(y, DOMAIN_TOL)
    }

    /// `y*` for `nu = 0`: maximizer of `min_i (A y)_i` over the unit ball,
    /// obtained as the normalized minimum-norm point of `{ A y >= e }`.
    pub fn max_min_direction(&self) -> Result<DVector<f64>> {
        let (d, n) = self.a.shape();
        let e = DVector::from_element(d, 1.0);
        // A' (A A')^{-1} e satisfies A y = e, so every row is active there
        let aat = &self.a * self.a.transpose();
        let z = aat
            .cholesky()
            .ok_or_else(|| Error::RankDeficient("A A' is not positive definite".into()))?
            .solve(&e);
        let start = self.a.tr_mul(&z);
        let qp = QpProblem::new(DMatrix::identity(n, n), DVector::zeros(n)).with_inequalities(self.a.clone(), e);
        let sol = solve_qp_from(&qp, &QpOptions::default(), &WarmStart { point: start, working_set: (0..d).collect() })?;
        let y = sol.into_optimal()?;
        Ok(&y / y.norm())
    }
}

impl SaddleProblem for ToyProblem {
    fn dim_x(&self) -> usize {
        self.a.nrows()
    }

    fn dim_y(&self) -> usize {
        self.a.ncols()
    }

    fn constants(&self) -> ProblemConstants {
        ProblemConstants { l_yx: self.l_yx, l_yy: 0.0, mu: 0.0, nu: self.nu }
    }

    fn grad_y(&self, x: &DVector<f64>, _y: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(self.a.tr_mul(&positive_part(x)))
    }

    fn prox_phi_x(&self, tau: f64, y: &DVector<f64>, x: &DVector<f64>) -> Result<DVector<f64>> {
        let w = &self.a * y;
        let tol = 1e-10 * (1.0 + y.amax() * self.a.amax() * y.len() as f64);
        if let Some(bad) = w.iter().find(|&&v| v < -tol) {
            return Err(Error::InvalidArgument(format!("(A y)_i = {bad:.3e} < 0: y outside C")));
        }
        let mut out = DVector::zeros(x.len());
        for i in 0..x.len() {
            out[i] = prox_positive_part_scaled(tau, w[i].max(0.0), x[i])?;
        }
        Ok(out)
    }

    fn prox_g(&self, sigma: f64, v: &DVector<f64>) -> Result<DVector<f64>> {
        project_polytope(&self.cone, &(v / (1.0 + self.nu * sigma)))
    }

    fn phi_value(&self, x: &DVector<f64>, y: &DVector<f64>) -> ExtendedReal {
        ExtendedReal::Finite(positive_part(x).dot(&(&self.a * y)))
    }

    fn g_value(&self, y: &DVector<f64>) -> ExtendedReal {
        if self.in_cone(y) {
            ExtendedReal::Finite(0.5 * self.nu * y.norm_squared())
        } else {
            ExtendedReal::PlusInf
        }
    }

    fn sample_point(&self, rng: &mut dyn RngCore) -> (DVector<f64>, DVector<f64>) {
        let x = DVector::from_fn(self.dim_x(), |_, _| rng.random_range(-5.0..=5.0));
        let v = DVector::from_fn(self.dim_y(), |_, _| rng.random_range(-5.0..=5.0));
        let y = project_polytope(&self.cone, &v).expect("projection onto a nonempty cone");
        (x, y)
    }

    /// `x* = -e`; `y* = 0` for `nu > 0`, the max-min direction for `nu = 0`.
    fn saddle_point(&self) -> Option<(DVector<f64>, DVector<f64>)> {
        let x = DVector::from_element(self.dim_x(), -1.0);
        if self.nu > 0.0 {
            return Some((x, DVector::zeros(self.dim_y())));
        }
        self.max_min_direction().ok().map(|y| (x, y))
    }
}
