use nalgebra::{DMatrix, DVector};
use rand::{Rng, RngCore};

use crate::error::{Error, Result};
use crate::linalg::lipschitz_norm;
use crate::problem::{ExtendedReal, ProblemConstants, SaddleProblem};

/// `Phi(x, y) = mu/2 |x|^2 + y'A x + b'x`, `g(y) = nu/2 |y|^2 + c'y`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticScsc {
    a: DMatrix<f64>,
    b: DVector<f64>,
    c: DVector<f64>,
    mu: f64,
    nu: f64,
    l_yx: f64,
}

impl QuadraticScsc {
    /// `a` is n x d; `b` has length d, `c` length n.
    pub fn new(a: DMatrix<f64>, b: DVector<f64>, c: DVector<f64>, mu: f64, nu: f64) -> Result<Self> {
        if b.len() != a.ncols() || c.len() != a.nrows() {
            return Err(Error::Dimension("b must match the columns of A and c its rows".into()));
        }
        if !(mu > 0.0 && nu > 0.0) {
            return Err(Error::InvalidArgument(format!("need mu > 0 and nu > 0, got {mu}, {nu}")));
        }
        let l_yx = lipschitz_norm(&a);
        Ok(QuadraticScsc { a, b, c, mu, nu, l_yx })
    }

    /// Random instance: Gaussian `A` rescaled to spectral norm `a_norm`, Gaussian `b`, `c`.
    pub fn random(d: usize, n: usize, mu: f64, nu: f64, a_norm: f64, rng: &mut dyn RngCore) -> Result<Self> {
        let mut gauss = || rng.sample::<f64, _>(rand_distr::StandardNormal);
        let a = DMatrix::from_fn(n, d, |_, _| gauss());
        let b = DVector::from_fn(d, |_, _| gauss());
        let c = DVector::from_fn(n, |_, _| gauss());
        let s = a.singular_values().max();
        QuadraticScsc::new(a * (a_norm / s), b, c, mu, nu)
    }

    pub fn a_matrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    /// Solves `[mu I, A'; A, -nu I] (x; y) = (-b; c)`.
    pub fn saddle(&self) -> Result<(DVector<f64>, DVector<f64>)> {
        let (n, d) = self.a.shape();
        let mut k = DMatrix::zeros(d + n, d + n);
        k.view_mut((0, 0), (d, d)).fill_diagonal(self.mu);
        k.view_mut((0, d), (d, n)).copy_from(&self.a.transpose());
        k.view_mut((d, 0), (n, d)).copy_from(&self.a);
        k.view_mut((d, d), (n, n)).fill_diagonal(-self.nu);
        let mut rhs = DVector::zeros(d + n);
        rhs.rows_mut(0, d).copy_from(&(-&self.b));
        rhs.rows_mut(d, n).copy_from(&self.c);
        let sol = k
            .clone()
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::Numerical("saddle system is singular".into()))?;
        let resid = (&k * &sol - &rhs).amax();
        if resid > 1e-10 * (1.0 + rhs.amax()) {
            return Err(Error::Numerical(format!("saddle system residual {resid:.3e}")));
        }
        Ok((sol.rows(0, d).into_owned(), sol.rows(d, n).into_owned()))
    }
}

impl SaddleProblem for QuadraticScsc {
    fn dim_x(&self) -> usize {
        self.a.ncols()
    }

    fn dim_y(&self) -> usize {
        self.a.nrows()
    }

    fn constants(&self) -> ProblemConstants {
        ProblemConstants { l_yx: self.l_yx, l_yy: 0.0, mu: self.mu, nu: self.nu }
    }

    fn grad_y(&self, x: &DVector<f64>, _y: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(&self.a * x)
    }

    fn prox_phi_x(&self, tau: f64, y: &DVector<f64>, x: &DVector<f64>) -> Result<DVector<f64>> {
        Ok((x - (self.a.tr_mul(y) + &self.b) * tau) / (1.0 + tau * self.mu))
    }

    fn prox_g(&self, sigma: f64, v: &DVector<f64>) -> Result<DVector<f64>> {
        Ok((v - &self.c * sigma) / (1.0 + sigma * self.nu))
    }

    fn phi_value(&self, x: &DVector<f64>, y: &DVector<f64>) -> ExtendedReal {
        ExtendedReal::Finite(0.5 * self.mu * x.norm_squared() + y.dot(&(&self.a * x)) + self.b.dot(x))
    }

    fn g_value(&self, y: &DVector<f64>) -> ExtendedReal {
        ExtendedReal::Finite(0.5 * self.nu * y.norm_squared() + self.c.dot(y))
    }

    fn sample_point(&self, rng: &mut dyn RngCore) -> (DVector<f64>, DVector<f64>) {
        let x = DVector::from_fn(self.dim_x(), |_, _| rng.random_range(-2.0..=2.0));
        let y = DVector::from_fn(self.dim_y(), |_, _| rng.random_range(-2.0..=2.0));
        (x, y)
    }

    fn saddle_point(&self) -> Option<(DVector<f64>, DVector<f64>)> {
        self.saddle().ok()
    }

    /// `mu/2 |x_bar - x*|^2 + nu/2 |y_bar - y*|^2`, exact because both partial
    /// gradients vanish at the saddle point.
    fn minimax_gap(
        &self,
        saddle: (&DVector<f64>, &DVector<f64>),
        erg: (&DVector<f64>, &DVector<f64>),
    ) -> Result<f64> {
        Ok(0.5 * self.mu * (erg.0 - saddle.0).norm_squared() + 0.5 * self.nu * (erg.1 - saddle.1).norm_squared())
    }
}
