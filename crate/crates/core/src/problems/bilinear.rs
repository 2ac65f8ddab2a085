use nalgebra::{DMatrix, DVector};
use rand::{Rng, RngCore};

use crate::error::{Error, Result};
use crate::linalg::lipschitz_norm;
use crate::problem::{ExtendedReal, ProblemConstants, SaddleProblem};

/// `Phi(x, y) = <y, A x>`, `g(y) = nu/2 |y|^2 - <c, y>`.
#[derive(Debug, Clone, PartialEq)]
pub struct BilinearProblem {
    a: DMatrix<f64>,
    c: DVector<f64>,
    nu: f64,
    l_yx: f64,
}

impl BilinearProblem {
    /// `a` is n x d (y-dimension by x-dimension).
    pub fn new(a: DMatrix<f64>, c: DVector<f64>, nu: f64) -> Result<Self> {
        if c.len() != a.nrows() {
            return Err(Error::Dimension("c must have as many entries as A has rows".into()));
        }
        if !(nu >= 0.0) {
            return Err(Error::InvalidArgument(format!("nu = {nu} must be >= 0")));
        }
        let l_yx = lipschitz_norm(&a);
        Ok(BilinearProblem { a, c, nu, l_yx })
    }

    pub fn a_matrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn c_vector(&self) -> &DVector<f64> {
        &self.c
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }
}

impl SaddleProblem for BilinearProblem {
    fn dim_x(&self) -> usize {
        self.a.ncols()
    }

    fn dim_y(&self) -> usize {
        self.a.nrows()
    }

    fn constants(&self) -> ProblemConstants {
        ProblemConstants { l_yx: self.l_yx, l_yy: 0.0, mu: 0.0, nu: self.nu }
    }

    fn grad_y(&self, x: &DVector<f64>, _y: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(&self.a * x)
    }

    fn prox_phi_x(&self, tau: f64, y: &DVector<f64>, x: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(x - self.a.tr_mul(y) * tau)
    }

    fn prox_g(&self, sigma: f64, v: &DVector<f64>) -> Result<DVector<f64>> {
        Ok((v + &self.c * sigma) / (1.0 + sigma * self.nu))
    }

    fn phi_value(&self, x: &DVector<f64>, y: &DVector<f64>) -> ExtendedReal {
        ExtendedReal::Finite(y.dot(&(&self.a * x)))
    }

    fn g_value(&self, y: &DVector<f64>) -> ExtendedReal {
        ExtendedReal::Finite(0.5 * self.nu * y.norm_squared() - self.c.dot(y))
    }

    fn sample_point(&self, rng: &mut dyn RngCore) -> (DVector<f64>, DVector<f64>) {
        let x = DVector::from_fn(self.dim_x(), |_, _| rng.random_range(-1.0..=1.0));
        let y = DVector::from_fn(self.dim_y(), |_, _| rng.random_range(-1.0..=1.0));
        (x, y)
    }
}
