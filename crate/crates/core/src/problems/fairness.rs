use std::sync::Mutex;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, RngCore};

use crate::error::{Error, Result};
use crate::problem::{ExtendedReal, ProblemConstants, SaddleProblem};
use crate::prox::{in_simplex, project_simplex, DOMAIN_TOL, FEAS_TOL};
use crate::qp::{ActiveSetSolver, QpOptions, QpProblem, WarmStart};

/// Minimax group fairness with a linear classifier:
/// `Phi(x, y) = sum_i y_i (1/n_i) sum_j max(0, 1 - b_ij a_ij'x)`, `g = delta_simplex`.
#[derive(Debug)]
pub struct FairnessProblem {
    /// All samples stacked group by group, one per row.
    features: DMatrix<f64>,
    labels: DVector<f64>,
    group_of: Vec<usize>,
    sizes: Vec<usize>,
    l_yx: f64,
    warm: Mutex<Option<ActiveSetSolver>>,
}

impl Clone for FairnessProblem {
    fn clone(&self) -> Self {
        FairnessProblem {
            features: self.features.clone(),
            labels: self.labels.clone(),
            group_of: self.group_of.clone(),
            sizes: self.sizes.clone(),
            l_yx: self.l_yx,
            warm: Mutex::new(None),
        }
    }
}

impl FairnessProblem {
    /// One `(features, labels)` pair per group; features hold one sample per row.
    pub fn new(groups: Vec<(DMatrix<f64>, DVector<f64>)>) -> Result<Self> {
        if groups.is_empty() {
            return Err(Error::InvalidArgument("need at least one group".into()));
        }
        let d = groups[0].0.ncols();
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        let mut group_of = Vec::new();
        let mut sizes = Vec::new();
        let mut l2 = 0.0;
        for (i, (a, b)) in groups.iter().enumerate() {
            if a.nrows() == 0 {
                return Err(Error::InvalidArgument(format!("group {i} is empty")));
            }
            if a.ncols() != d || b.len() != a.nrows() {
                return Err(Error::Dimension(format!("group {i} has inconsistent shapes")));
            }
            if b.iter().any(|&v| v != 1.0 && v != -1.0) {
                return Err(Error::InvalidArgument(format!("group {i} has labels outside {{-1, 1}}")));
            }
            if a.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidArgument(format!("group {i} has non-finite features")));
            }
            l2 += a.norm_squared() / a.nrows() as f64;
            for j in 0..a.nrows() {
                rows.push(a.row(j).into_owned());
                labels.push(b[j]);
                group_of.push(i);
            }
            sizes.push(a.nrows());
        }
        Ok(FairnessProblem {
            features: DMatrix::from_rows(&rows),
            labels: DVector::from_vec(labels),
            group_of,
            sizes,
            l_yx: l2.sqrt(),
            warm: Mutex::new(None),
        })
    }

    /// The same samples as a single group.
    pub fn single_group(&self) -> Result<FairnessProblem> {
        FairnessProblem::new(vec![(self.features.clone(), self.labels.clone())])
    }

    pub fn num_groups(&self) -> usize {
        self.sizes.len()
    }

    pub fn group_sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn features(&self) -> &DMatrix<f64> {
        &self.features
    }

    pub fn labels(&self) -> &DVector<f64> {
        &self.labels
    }

    /// Group index of every stacked sample.
    pub fn group_of(&self) -> &[usize] {
        &self.group_of
    }

    /// `max(0, 1 - b_j a_j'x)` for every sample.
    pub fn hinge(&self, x: &DVector<f64>) -> DVector<f64> {
        let margin = (&self.features * x).component_mul(&self.labels);
        margin.map(|m| (1.0 - m).max(0.0))
    }

    /// Mean hinge loss of every group.
    pub fn group_losses(&self, x: &DVector<f64>) -> DVector<f64> {
        let h = self.hinge(x);
        let mut out = DVector::zeros(self.sizes.len());
        for (j, &g) in self.group_of.iter().enumerate() {
            out[g] += h[j];
        }
        for (g, &n) in self.sizes.iter().enumerate() {
            out[g] /= n as f64;
        }
        out
    }

    fn slack_qp(&self) -> Result<ActiveSetSolver> {
        let (n, d) = self.features.shape();
        let mut q = DMatrix::zeros(d + n, d + n);
        q.view_mut((0, 0), (d, d)).fill_diagonal(1.0);
        let mut g = DMatrix::zeros(2 * n, d + n);
        let mut h = DVector::zeros(2 * n);
        for j in 0..n {
            g[(j, d + j)] = 1.0;
            for k in 0..d {
                g[(n + j, k)] = self.labels[j] * self.features[(j, k)];
            }
            g[(n + j, d + j)] = 1.0;
            h[n + j] = 1.0;
        }
        ActiveSetSolver::new(QpProblem::new(q, DVector::zeros(d + n)).with_inequalities(g, h), QpOptions::default())
    }

    /// Feasible start `u = x`, `r = hinge(x)` with one active row per sample.
    fn slack_start(&self, x: &DVector<f64>) -> WarmStart {
        let n = self.features.nrows();
        let h = self.hinge(x);
        let mut point = x.clone().resize_vertically(x.len() + n, 0.0);
        let mut working_set = Vec::with_capacity(n);
        for j in 0..n {
            point[x.len() + j] = h[j];
            working_set.push(if h[j] > 0.0 { n + j } else { j });
        }
        WarmStart { point, working_set }
    }
}

impl SaddleProblem for FairnessProblem {
    fn dim_x(&self) -> usize {
        self.features.ncols()
    }

    fn dim_y(&self) -> usize {
        self.sizes.len()
    }

    fn constants(&self) -> ProblemConstants {
        ProblemConstants { l_yx: self.l_yx, l_yy: 0.0, mu: 0.0, nu: 0.0 }
    }

    fn grad_y(&self, x: &DVector<f64>, _y: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(self.group_losses(x))
    }

    /// Solves the slack QP `min tau sum_j w_j r_j + 1/2 |u - x|^2`
    /// subject to `r >= 0`, `r_j + b_j a_j'u >= 1`, with `w_j = y_i / n_i`.
    fn prox_phi_x(&self, tau: f64, y: &DVector<f64>, x: &DVector<f64>) -> Result<DVector<f64>> {
        if y.len() != self.dim_y() || x.len() != self.dim_x() {
            return Err(Error::Dimension("prox input has wrong length".into()));
        }
        if !in_simplex(y, FEAS_TOL) {
            return Err(Error::InvalidArgument("y lies outside the simplex".into()));
        }
        if tau == 0.0 {
            return Ok(x.clone());
        }
        let (n, d) = self.features.shape();
        let mut q = DVector::zeros(d + n);
        q.rows_mut(0, d).copy_from(&(-x));
        for j in 0..n {
            let g = self.group_of[j];
            q[d + j] = tau * y[g] / self.sizes[g] as f64;
        }
        let mut guard = self.warm.lock().unwrap_or_else(|e| e.into_inner());
        if guard.is_none() {
            let mut solver = self.slack_qp()?;
            solver.warm_start(&self.slack_start(x))?;
            *guard = Some(solver);
        }
        let solver = guard.as_mut().expect("initialized above");
        solver.set_linear_term(q)?;
        match solver.solve() {
            Ok(sol) => Ok(sol.into_optimal()?.rows(0, d).into_owned()),
            Err(e) => {
                *guard = None;
                Err(e)
            }
        }
    }

    fn prox_g(&self, _sigma: f64, v: &DVector<f64>) -> Result<DVector<f64>> {
        project_simplex(v)
    }

    fn phi_value(&self, x: &DVector<f64>, y: &DVector<f64>) -> ExtendedReal {
        ExtendedReal::Finite(self.group_losses(x).dot(y))
    }

    fn g_value(&self, y: &DVector<f64>) -> ExtendedReal {
        if y.len() == self.dim_y() && in_simplex(y, DOMAIN_TOL) {
            ExtendedReal::Finite(0.0)
        } else {
            ExtendedReal::PlusInf
        }
    }

    fn sample_point(&self, rng: &mut dyn RngCore) -> (DVector<f64>, DVector<f64>) {
        let x = DVector::from_fn(self.dim_x(), |_, _| rng.random_range(-1.0..=1.0));
        let raw = DVector::from_fn(self.dim_y(), |_, _| -rng.random::<f64>().max(f64::MIN_POSITIVE).ln());
        (x, &raw / raw.sum())
    }

    fn tangent_y(&self, d: &mut DVector<f64>) {
        let m = d.mean();
        d.add_scalar_mut(-m);
    }
}
