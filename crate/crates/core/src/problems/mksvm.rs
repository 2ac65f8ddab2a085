use nalgebra::{DMatrix, DVector};
use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{spectral_norm, NORM_INFLATION};
use crate::problem::{ExtendedReal, ProblemConstants, SaddleProblem};
use crate::prox::{in_simplex, project_box_hyperplane, project_simplex, BoxHyperplaneSet, DOMAIN_TOL, FEAS_TOL};

/// The three kernel families used for training.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KernelKind {
    /// `(1 + a'b)^2`
    Polynomial,
    /// `exp(-5 |a - b|^2)`
    Gaussian,
    /// `a'b`
    Linear,
}

impl KernelKind {
    pub const ALL: [KernelKind; 3] = [KernelKind::Polynomial, KernelKind::Gaussian, KernelKind::Linear];
}

/// Kernel matrix over the rows of `z`.
pub fn kernel_matrix(kind: KernelKind, z: &DMatrix<f64>) -> DMatrix<f64> {
    let g = z * z.transpose();
    match kind {
        KernelKind::Polynomial => g.map(|v| (1.0 + v) * (1.0 + v)),
        KernelKind::Linear => g,
        KernelKind::Gaussian => {
            let sq = g.diagonal();
            DMatrix::from_fn(g.nrows(), g.ncols(), |i, j| (-5.0 * (sq[i] + sq[j] - 2.0 * g[(i, j)]).max(0.0)).exp())
        }
    }
}

/// `D^{-1/2} K D^{-1/2}` with `D = diag(K)`; every diagonal entry must be positive.
pub fn normalize_kernel(k: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !k.is_square() {
        return Err(Error::Dimension("kernel matrix must be square".into()));
    }
    let d = k.diagonal();
    if let Some(i) = d.iter().position(|&v| !(v > 0.0)) {
        return Err(Error::InvalidArgument(format!("kernel diagonal entry {i} is {} (not positive)", d[i])));
    }
    let s = d.map(|v| 1.0 / v.sqrt());
    Ok(DMatrix::from_fn(k.nrows(), k.ncols(), |i, j| k[(i, j)] * s[i] * s[j]))
}

/// Multi-kernel SVM dual:
/// `Phi(x, y) = delta_simplex(x) + mu/2 |x|^2 - 1/2 sum_i x_i y'M_i y + e'y`,
/// `g(y) = delta_Y(y) + nu/2 |y|^2`, `Y = { 0 <= y <= C, b'y = 0 }`.
#[derive(Debug, Clone)]
pub struct MkSvmProblem {
    m_list: Vec<DMatrix<f64>>,
    /// `c / r_i`, mapping `x` back to kernel weights `eta`.
    weights: DVector<f64>,
    labels: DVector<f64>,
    c_box: f64,
    mu: f64,
    nu: f64,
    y_set: BoxHyperplaneSet,
    l_yx: f64,
    l_yy: f64,
}

/// Labels for the test block and how the offset index was chosen.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub labels: Vec<f64>,
    pub j0: usize,
    /// False when no `y_j` lies in `[1e-4 C, C - 1e-4 C]` and the most interior one was used.
    pub j0_in_band: bool,
    pub gamma: f64,
}

impl MkSvmProblem {
    /// `kernels` are full `(n + l) x (n + l)` matrices with the `n` training rows first.
    /// `M_i = (c / r_i) diag(b) K_i^tr diag(b)` with `r_i = tr K_i` and `c = sum_i r_i`.
    pub fn from_kernels(kernels: &[DMatrix<f64>], labels: DVector<f64>, c_box: f64, mu: f64, nu: f64) -> Result<Self> {
        let n = labels.len();
        if kernels.is_empty() {
            return Err(Error::InvalidArgument("need at least one kernel".into()));
        }
        if n < 2 {
            return Err(Error::Dimension("need at least two training points".into()));
        }
        if let Some(k) = kernels.iter().find(|k| !k.is_square() || k.nrows() < n) {
            return Err(Error::Dimension(format!("kernel is {}x{}, need square with >= {n} rows", k.nrows(), k.ncols())));
        }
        let r: Vec<f64> = kernels.iter().map(|k| k.trace()).collect();
        if r.iter().any(|&v| !(v > 0.0)) {
            return Err(Error::InvalidArgument("kernel traces must be positive".into()));
        }
        let c: f64 = r.iter().sum();
        let m_list = kernels
            .iter()
            .zip(&r)
            .map(|(k, &ri)| {
                let kt = k.view((0, 0), (n, n));
                DMatrix::from_fn(n, n, |i, j| c / ri * labels[i] * labels[j] * kt[(i, j)])
            })
            .collect();
        let weights = DVector::from_iterator(r.len(), r.iter().map(|&ri| c / ri));
        MkSvmProblem::new(m_list, weights, labels, c_box, mu, nu)
    }

    /// `weights[i] = c / r_i` maps `x` to the kernel weights of the predictor.
    pub fn new(
        m_list: Vec<DMatrix<f64>>,
        weights: DVector<f64>,
        labels: DVector<f64>,
        c_box: f64,
        mu: f64,
        nu: f64,
    ) -> Result<Self> {
        let n = labels.len();
        if labels.iter().any(|&b| b != 1.0 && b != -1.0) {
            return Err(Error::InvalidArgument("labels must be +1 or -1".into()));
        }
        if labels.iter().all(|&b| b == labels[0]) {
            return Err(Error::InvalidArgument("training labels contain a single class".into()));
        }
        if m_list.is_empty() || weights.len() != m_list.len() {
            return Err(Error::Dimension("need one weight per kernel block".into()));
        }
        if m_list.iter().any(|m| m.shape() != (n, n)) {
            return Err(Error::Dimension(format!("every M_i must be {n}x{n}")));
        }
        if !(c_box > 0.0 && c_box.is_finite()) || !(mu >= 0.0) || !(nu >= 0.0) {
            return Err(Error::InvalidArgument(format!("need C > 0, mu >= 0, nu >= 0; got {c_box}, {mu}, {nu}")));
        }
        for (i, m) in m_list.iter().enumerate() {
            let asym = (m - m.transpose()).amax();
            if asym > 1e-8 * (1.0 + m.amax()) {
                return Err(Error::InvalidArgument(format!("M_{i} is not symmetric ({asym:.3e})")));
            }
            let lmin = m.clone().symmetric_eigenvalues().min();
            if lmin < -1e-8 * (1.0 + m.amax()) {
                return Err(Error::InvalidArgument(format!("M_{i} is not PSD (eigenvalue {lmin:.3e})")));
            }
        }
        let y_set = BoxHyperplaneSet::new(0.0, c_box, labels.clone(), 0.0)?;
        let m_norm = m_list.iter().map(spectral_norm).fold(0.0, f64::max) * NORM_INFLATION;
        let d = m_list.len() as f64;
        Ok(MkSvmProblem {
            l_yx: c_box * (d * n as f64).sqrt() * m_norm,
            l_yy: m_norm,
            m_list,
            weights,
            labels,
            c_box,
            mu,
            nu,
            y_set,
        })
    }

    pub fn m_list(&self) -> &[DMatrix<f64>] {
        &self.m_list
    }

    pub fn labels(&self) -> &DVector<f64> {
        &self.labels
    }

    pub fn c_box(&self) -> f64 {
        self.c_box
    }

    pub fn y_set(&self) -> &BoxHyperplaneSet {
        &self.y_set
    }

    /// `(1/2 y'M_i y)_i`.
    pub fn xi(&self, y: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(self.m_list.len(), self.m_list.iter().map(|m| 0.5 * y.dot(&(m * y))))
    }

    /// Kernel weights `eta_i = (c / r_i) x_i`.
    pub fn eta(&self, x: &DVector<f64>) -> DVector<f64> {
        x.component_mul(&self.weights)
    }

    /// Classifies rows `n..` of the full kernels from the dual pair `(x, y)`.
    pub fn predict(&self, x: &DVector<f64>, y: &DVector<f64>, kernels: &[DMatrix<f64>]) -> Result<Prediction> {
        let n = self.labels.len();
        if kernels.len() != self.m_list.len() || x.len() != kernels.len() || y.len() != n {
            return Err(Error::Dimension("prediction inputs do not match the problem".into()));
        }
        let total = kernels[0].nrows();
        if kernels.iter().any(|k| k.shape() != (total, total)) || total < n {
            return Err(Error::Dimension("kernels must share one square shape".into()));
        }
        let eta = self.eta(x);
        let mut kstar = DMatrix::zeros(total, total);
        for (k, &e) in kernels.iter().zip(eta.iter()) {
            kstar += k * e;
        }
        let c = self.c_box;
        let tol_act = 1e-4 * c;
        let (j0, depth) = y
            .iter()
            .enumerate()
            .map(|(j, &a)| (j, a.min(c - a)))
            .fold((0, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best });
        let j0_in_band = depth >= tol_act;
        let by = y.component_mul(&self.labels);
        let gamma = self.labels[j0] * (1.0 - self.nu * y[j0]) - (0..n).map(|i| by[i] * kstar[(i, j0)]).sum::<f64>();
        let labels = (n..total)
            .map(|k| {
                let s: f64 = (0..n).map(|i| by[i] * kstar[(i, k)]).sum::<f64>() + gamma;
                if s >= 0.0 {
                    1.0
                } else {
                    -1.0
                }
            })
            .collect();
        Ok(Prediction { labels, j0, j0_in_band, gamma })
    }
}

impl SaddleProblem for MkSvmProblem {
    fn dim_x(&self) -> usize {
        self.m_list.len()
    }

    fn dim_y(&self) -> usize {
        self.labels.len()
    }

    fn constants(&self) -> ProblemConstants {
        ProblemConstants { l_yx: self.l_yx, l_yy: self.l_yy, mu: self.mu, nu: self.nu }
    }

    fn grad_y(&self, x: &DVector<f64>, y: &DVector<f64>) -> Result<DVector<f64>> {
        if !in_simplex(x, FEAS_TOL) {
            return Err(Error::InvalidArgument("x lies outside the simplex".into()));
        }
        let mut g = DVector::from_element(y.len(), 1.0);
        for (m, &xi) in self.m_list.iter().zip(x.iter()) {
            g.gemv(-xi, m, y, 1.0);
        }
        Ok(g)
    }

    fn prox_phi_x(&self, tau: f64, y: &DVector<f64>, x: &DVector<f64>) -> Result<DVector<f64>> {
        project_simplex(&((x + self.xi(y) * tau) / (1.0 + self.mu * tau)))
    }

    fn prox_g(&self, sigma: f64, v: &DVector<f64>) -> Result<DVector<f64>> {
        project_box_hyperplane(&self.y_set, &(v / (1.0 + self.nu * sigma)))
    }

    fn phi_value(&self, x: &DVector<f64>, y: &DVector<f64>) -> ExtendedReal {
        if !in_simplex(x, DOMAIN_TOL) {
            return ExtendedReal::PlusInf;
        }
        ExtendedReal::Finite(0.5 * self.mu * x.norm_squared() - x.dot(&self.xi(y)) + y.sum())
    }

    fn g_value(&self, y: &DVector<f64>) -> ExtendedReal {
        if self.y_set.contains(y, DOMAIN_TOL) {
            ExtendedReal::Finite(0.5 * self.nu * y.norm_squared())
        } else {
            ExtendedReal::PlusInf
        }
    }

    fn sample_point(&self, rng: &mut dyn RngCore) -> (DVector<f64>, DVector<f64>) {
        let raw = DVector::from_fn(self.dim_x(), |_, _| -rng.random::<f64>().max(f64::MIN_POSITIVE).ln());
        let x = &raw / raw.sum();
        let c = self.c_box;
        let v = DVector::from_fn(self.dim_y(), |_, _| rng.random_range(-0.5 * c..=1.5 * c));
        let y = project_box_hyperplane(&self.y_set, &v).expect("Y contains 0");
        (x, y)
    }

    fn tangent_x(&self, d: &mut DVector<f64>) {
        let m = d.mean();
        d.add_scalar_mut(-m);
    }

    fn tangent_y(&self, d: &mut DVector<f64>) {
        self.y_set.tangent(d);
    }
}
