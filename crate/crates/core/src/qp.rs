//! Dense convex quadratic programming by a primal active-set method.
//!
//! Solves `min 1/2 u'Qu + q'u  s.t.  Gu >= h, Eu = e` with `Q` positive
//! semidefinite. The working-set constraint matrix is kept as a QR
//! factorization `A_W' = Qf [R; 0]` updated by Givens rotations, and steps
//! are taken in the null space spanned by the trailing columns of `Qf`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `min 1/2 u'Qu + q'u` subject to `G u >= h` and `E u = e`.
#[derive(Debug, Clone, PartialEq)]
pub struct QpProblem {
    pub q_matrix: DMatrix<f64>,
    pub q_vector: DVector<f64>,
    pub ineq_matrix: DMatrix<f64>,
    pub ineq_vector: DVector<f64>,
    pub eq_matrix: DMatrix<f64>,
    pub eq_vector: DVector<f64>,
}

impl QpProblem {
    /// Unconstrained problem; add constraints with the builder methods.
    pub fn new(q_matrix: DMatrix<f64>, q_vector: DVector<f64>) -> Self {
        let n = q_vector.len();
        QpProblem {
            q_matrix,
            q_vector,
            ineq_matrix: DMatrix::zeros(0, n),
            ineq_vector: DVector::zeros(0),
            eq_matrix: DMatrix::zeros(0, n),
            eq_vector: DVector::zeros(0),
        }
    }

    pub fn with_inequalities(mut self, g: DMatrix<f64>, h: DVector<f64>) -> Self {
        self.ineq_matrix = g;
        self.ineq_vector = h;
        self
    }

    pub fn with_equalities(mut self, e: DMatrix<f64>, ev: DVector<f64>) -> Self {
        self.eq_matrix = e;
        self.eq_vector = ev;
        self
    }

    pub fn dim(&self) -> usize {
        self.q_vector.len()
    }

    pub fn objective(&self, u: &DVector<f64>) -> f64 {
        0.5 * u.dot(&(&self.q_matrix * u)) + self.q_vector.dot(u)
    }

    /// Largest constraint violation at `u`.
    pub fn infeasibility(&self, u: &DVector<f64>) -> f64 {
        let mut v = 0.0_f64;
        if self.ineq_matrix.nrows() > 0 {
            let r = &self.ineq_matrix * u - &self.ineq_vector;
            v = v.max(r.iter().fold(0.0_f64, |m, &x| m.max(-x)));
        }
        if self.eq_matrix.nrows() > 0 {
            let r = &self.eq_matrix * u - &self.eq_vector;
            v = v.max(r.amax());
        }
        v
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.dim();
        if n == 0 {
            return Err(Error::Dimension("qp with zero variables".into()));
        }
        if self.q_matrix.shape() != (n, n) {
            return Err(Error::Dimension(format!("Q is {:?}, expected ({n}, {n})", self.q_matrix.shape())));
        }
        if self.ineq_matrix.ncols() != n || self.ineq_matrix.nrows() != self.ineq_vector.len() {
            return Err(Error::Dimension("inequality block has inconsistent shape".into()));
        }
        if self.eq_matrix.ncols() != n || self.eq_matrix.nrows() != self.eq_vector.len() {
            return Err(Error::Dimension("equality block has inconsistent shape".into()));
        }
        let scale = self.q_matrix.amax().max(1.0);
        if (&self.q_matrix - self.q_matrix.transpose()).amax() > 1e-12 * scale {
            return Err(Error::InvalidArgument("Q is not symmetric".into()));
        }
        let finite = |m: &[f64]| m.iter().all(|v| v.is_finite());
        if !(finite(self.q_matrix.as_slice())
            && finite(self.q_vector.as_slice())
            && finite(self.ineq_matrix.as_slice())
            && finite(self.ineq_vector.as_slice())
            && finite(self.eq_matrix.as_slice())
            && finite(self.eq_vector.as_slice()))
        {
            return Err(Error::InvalidArgument("qp data contains non-finite entries".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum QpStatus {
    Optimal,
    MaxIter,
    Infeasible,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QpOptions {
    pub tol: f64,
    /// Defaults to `10 (n + m)` when `None`.
    pub max_iter: Option<usize>,
}

impl Default for QpOptions {
    fn default() -> Self {
        QpOptions { tol: 1e-9, max_iter: None }
    }
}

/// Feasible starting point plus a guess of the active inequalities.
#[derive(Debug, Clone, PartialEq)]
pub struct WarmStart {
    pub point: DVector<f64>,
    pub working_set: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QpSolution {
    pub x: DVector<f64>,
    pub status: QpStatus,
    pub ineq_multipliers: DVector<f64>,
    pub eq_multipliers: DVector<f64>,
    /// Active inequality indices, ascending.
    pub working_set: Vec<usize>,
    pub iterations: usize,
}

impl QpSolution {
    pub fn into_optimal(self) -> Result<DVector<f64>> {
        match self.status {
            QpStatus::Optimal => Ok(self.x),
            status => Err(Error::Qp { status, iterations: self.iterations }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KktResiduals {
    pub stationarity: f64,
    pub primal: f64,
    pub dual: f64,
    pub complementarity: f64,
}

impl KktResiduals {
    pub fn max(&self) -> f64 {
        self.stationarity.max(self.primal).max(self.dual).max(self.complementarity)
    }
}

/// KKT residuals (infinity norms) of a candidate primal-dual pair.
pub fn kkt_residuals(p: &QpProblem, x: &DVector<f64>, lambda: &DVector<f64>, mu: &DVector<f64>) -> KktResiduals {
    let mut stat = &p.q_matrix * x + &p.q_vector;
    if p.ineq_matrix.nrows() > 0 {
        stat -= p.ineq_matrix.tr_mul(lambda);
    }
    if p.eq_matrix.nrows() > 0 {
        stat -= p.eq_matrix.tr_mul(mu);
    }
    let mut comp = 0.0_f64;
    if p.ineq_matrix.nrows() > 0 {
        let slack = &p.ineq_matrix * x - &p.ineq_vector;
        for i in 0..slack.len() {
            comp = comp.max((lambda[i] * slack[i]).abs());
        }
    }
    KktResiduals {
        stationarity: if stat.is_empty() { 0.0 } else { stat.amax() },
        primal: p.infeasibility(x),
        dual: lambda.iter().fold(0.0_f64, |m, &l| m.max(-l)),
        complementarity: comp,
    }
}

pub fn solution_kkt(p: &QpProblem, s: &QpSolution) -> KktResiduals {
    kkt_residuals(p, &s.x, &s.ineq_multipliers, &s.eq_multipliers)
}

/// Solves `p` from scratch, finding a feasible point first when needed.
pub fn solve_qp(p: &QpProblem, opts: &QpOptions) -> Result<QpSolution> {
    ActiveSetSolver::new(p.clone(), *opts)?.solve()
}

/// Solves `p` starting from `start`; falls back to a feasibility phase if the
/// point is infeasible.
pub fn solve_qp_from(p: &QpProblem, opts: &QpOptions, start: &WarmStart) -> Result<QpSolution> {
    let mut s = ActiveSetSolver::new(p.clone(), *opts)?;
    s.warm_start(start)?;
    s.solve()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Row {
    Eq(usize),
    Ineq(usize),
}

#[derive(Debug, Clone)]
enum Hessian {
    Scaled(f64),
    Diagonal(DVector<f64>),
    Dense,
}

fn classify(q: &DMatrix<f64>) -> Hessian {
    let n = q.nrows();
    let mut diagonal = true;
    'outer: for j in 0..n {
        for i in 0..n {
            if i != j && q[(i, j)] != 0.0 {
                diagonal = false;
                break 'outer;
            }
        }
    }
    if !diagonal {
        return Hessian::Dense;
    }
    let d = q.diagonal();
    if d.iter().all(|&v| v == d[0]) {
        Hessian::Scaled(d[0])
    } else {
        Hessian::Diagonal(d)
    }
}

/// QR factorization `A_W' = Qf [R; 0]` of the working-set rows.
#[derive(Debug, Clone)]
struct Factor {
    t: usize,
    qf: DMatrix<f64>,
    r: DMatrix<f64>,
}

fn givens(a: f64, b: f64) -> (f64, f64, f64) {
    if b == 0.0 {
        return (1.0, 0.0, a);
    }
    let r = a.hypot(b);
    (a / r, b / r, r)
}

impl Factor {
    fn identity(n: usize) -> Self {
        Factor { t: 0, qf: DMatrix::identity(n, n), r: DMatrix::zeros(n, n) }
    }

    fn rotate_qf(&mut self, i: usize, j: usize, c: f64, s: f64) {
        let n = self.qf.nrows();
        for row in 0..n {
            let a = self.qf[(row, i)];
            let b = self.qf[(row, j)];
            self.qf[(row, i)] = c * a + s * b;
            self.qf[(row, j)] = -s * a + c * b;
        }
    }

    /// Appends column `a`; returns false if it is numerically dependent.
    fn add(&mut self, a: &DVector<f64>) -> bool {
        let n = self.qf.nrows();
        let t = self.t;
        if t >= n {
            return false;
        }
        let mut w = self.qf.tr_mul(a);
        for i in (t + 1..n).rev() {
            if w[i] == 0.0 {
                continue;
            }
            let (c, s, r) = givens(w[i - 1], w[i]);
            w[i - 1] = r;
            w[i] = 0.0;
            self.rotate_qf(i - 1, i, c, s);
        }
        if w[t].abs() <= 1e-13 * a.norm().max(f64::MIN_POSITIVE) {
            // undo is unnecessary: the rotations only mixed null-space columns
            return false;
        }
        for i in 0..=t {
            self.r[(i, t)] = w[i];
        }
        self.t += 1;
        true
    }

    /// Removes column `j` and restores triangular form.
    fn remove(&mut self, j: usize) {
        let t = self.t;
        for k in j..t - 1 {
            for i in 0..=k + 1 {
                self.r[(i, k)] = self.r[(i, k + 1)];
            }
        }
        for i in 0..t {
            self.r[(i, t - 1)] = 0.0;
        }
        let tn = t - 1;
        for k in j..tn {
            let (c, s, r) = givens(self.r[(k, k)], self.r[(k + 1, k)]);
            self.r[(k, k)] = r;
            self.r[(k + 1, k)] = 0.0;
            for col in k + 1..tn {
                let a = self.r[(k, col)];
                let b = self.r[(k + 1, col)];
                self.r[(k, col)] = c * a + s * b;
                self.r[(k + 1, col)] = -s * a + c * b;
            }
            self.rotate_qf(k, k + 1, c, s);
        }
        self.t = tn;
    }

    /// Solves `R lambda = Y'g`.
    fn multipliers(&self, g: &DVector<f64>) -> DVector<f64> {
        let t = self.t;
        let rhs = self.qf.columns(0, t).tr_mul(g);
        let mut lam = DVector::zeros(t);
        for i in (0..t).rev() {
            let mut s = rhs[i];
            for k in i + 1..t {
                s -= self.r[(i, k)] * lam[k];
            }
            lam[i] = s / self.r[(i, i)];
        }
        lam
    }
}

enum Phase1 {
    Feasible(DVector<f64>, usize),
    Infeasible(usize),
    /// Iteration limit reached before feasibility was decided.
    Exhausted(usize),
}

enum Step {
    /// Minimizer of the model on the current face; full step is 1.
    Newton(DVector<f64>),
    /// Zero-curvature descent direction; unbounded unless blocked.
    Ray(DVector<f64>),
}

/// Reusable active-set solver. After a solve the final working set and its
/// factorization are kept, so a later solve with a different linear term
/// `q` starts from the previous solution.
#[derive(Debug, Clone)]
pub struct ActiveSetSolver {
    problem: QpProblem,
    opts: QpOptions,
    hessian: Hessian,
    state: Option<(DVector<f64>, Vec<Row>, Factor)>,
}

impl ActiveSetSolver {
    pub fn new(problem: QpProblem, opts: QpOptions) -> Result<Self> {
        problem.validate()?;
        if !(opts.tol > 0.0) {
            return Err(Error::InvalidArgument("qp tolerance must be positive".into()));
        }
        let hessian = classify(&problem.q_matrix);
        Ok(ActiveSetSolver { problem, opts, hessian, state: None })
    }

    pub fn problem(&self) -> &QpProblem {
        &self.problem
    }

    /// Replaces the linear term; the previous solution stays a feasible start.
    pub fn set_linear_term(&mut self, q: DVector<f64>) -> Result<()> {
        if q.len() != self.problem.dim() {
            return Err(Error::Dimension("linear term has wrong length".into()));
        }
        self.problem.q_vector = q;
        Ok(())
    }

    /// Installs a starting point; ignored later if it turns out infeasible.
    pub fn warm_start(&mut self, start: &WarmStart) -> Result<()> {
        let p = &self.problem;
        if start.point.len() != p.dim() {
            return Err(Error::Dimension("warm-start point has wrong length".into()));
        }
        if p.infeasibility(&start.point) > self.opts.tol {
            self.state = None;
            return Ok(());
        }
        let mut ws = start.working_set.clone();
        ws.sort_unstable();
        ws.dedup();
        let slack = &p.ineq_matrix * &start.point - &p.ineq_vector;
        let active: Vec<usize> = ws
            .into_iter()
            .filter(|&i| i < slack.len() && slack[i].abs() <= self.opts.tol)
            .collect();
        self.state = Some(self.factor_from(start.point.clone(), &active));
        Ok(())
    }

    fn row(&self, r: Row) -> DVector<f64> {
        match r {
            Row::Eq(i) => self.problem.eq_matrix.row(i).transpose(),
            Row::Ineq(i) => self.problem.ineq_matrix.row(i).transpose(),
        }
    }

    fn factor_from(&self, x: DVector<f64>, active: &[usize]) -> (DVector<f64>, Vec<Row>, Factor) {
        let n = self.problem.dim();
        let mut f = Factor::identity(n);
        let mut w = Vec::new();
        for i in 0..self.problem.eq_matrix.nrows() {
            if f.add(&self.row(Row::Eq(i))) {
                w.push(Row::Eq(i));
            }
        }
        for &i in active {
            if f.add(&self.row(Row::Ineq(i))) {
                w.push(Row::Ineq(i));
            }
        }
        (x, w, f)
    }

    fn max_iter(&self) -> usize {
        self.opts
            .max_iter
            .unwrap_or(10 * (self.problem.dim() + self.problem.ineq_matrix.nrows() + self.problem.eq_matrix.nrows()))
    }

    pub fn solve(&mut self) -> Result<QpSolution> {
        let max_iter = self.max_iter();
        let mut used = 0;
        if self.state.is_none() {
            match self.feasible_point(max_iter)? {
                Phase1::Feasible(x, it) => {
                    used = it;
                    self.state = Some(self.factor_from(x, &[]));
                }
                failed => {
                    let (status, it) = match failed {
                        Phase1::Exhausted(it) => (QpStatus::MaxIter, it),
                        Phase1::Infeasible(it) => (QpStatus::Infeasible, it),
                        Phase1::Feasible(..) => unreachable!(),
                    };
                    let p = &self.problem;
                    return Ok(QpSolution {
                        x: DVector::zeros(p.dim()),
                        status,
                        ineq_multipliers: DVector::zeros(p.ineq_matrix.nrows()),
                        eq_multipliers: DVector::zeros(p.eq_matrix.nrows()),
                        working_set: Vec::new(),
                        iterations: it,
                    });
                }
            }
        }
        let (mut x, mut w, mut f) = self.state.take().expect("state set above");
        let res = run_active_set(
            &self.problem.q_matrix,
            &self.problem.q_vector,
            &self.hessian,
            &self.problem,
            &mut x,
            &mut w,
            &mut f,
            max_iter.saturating_sub(used),
            self.opts.tol,
            None,
        );
        let (status, iters, lam) = match res {
            Ok(out) => out,
            Err(e) => return Err(e),
        };
        let p = &self.problem;
        let mut li = DVector::zeros(p.ineq_matrix.nrows());
        let mut le = DVector::zeros(p.eq_matrix.nrows());
        for (k, r) in w.iter().enumerate() {
            match *r {
                Row::Eq(i) => le[i] = lam[k],
                Row::Ineq(i) => li[i] = lam[k],
            }
        }
        let mut ws: Vec<usize> = w
            .iter()
            .filter_map(|r| match r {
                Row::Ineq(i) => Some(*i),
                Row::Eq(_) => None,
            })
            .collect();
        ws.sort_unstable();
        let sol = QpSolution {
            x: x.clone(),
            status,
            ineq_multipliers: li,
            eq_multipliers: le,
            working_set: ws,
            iterations: used + iters,
        };
        self.state = Some((x, w, f));
        if status == QpStatus::Optimal {
            let kkt = solution_kkt(&self.problem, &sol);
            if kkt.max() > self.opts.tol {
                return Err(Error::Numerical(format!("qp finished with kkt residual {:.3e}", kkt.max())));
            }
        }
        Ok(sol)
    }

    /// Feasibility phase: an LP in `(x, s)` minimizing the largest violation `s`.
    fn feasible_point(&self, max_iter: usize) -> Result<Phase1> {
        let p = &self.problem;
        let n = p.dim();
        let tol = self.opts.tol;
        let x0 = if p.eq_matrix.nrows() > 0 {
            let svd = p.eq_matrix.clone().svd(true, true);
            let x = svd
                .solve(&p.eq_vector, 1e-13 * svd.singular_values.max().max(1.0))
                .map_err(|e| Error::Numerical(e.to_string()))?;
            if (&p.eq_matrix * &x - &p.eq_vector).amax() > tol {
                return Ok(Phase1::Infeasible(0));
            }
            x
        } else {
            DVector::zeros(n)
        };
        let m = p.ineq_matrix.nrows();
        let viol = if m > 0 {
            (&p.ineq_vector - &p.ineq_matrix * &x0).max().max(0.0)
        } else {
            0.0
        };
        if viol <= 0.0 {
            return Ok(Phase1::Feasible(x0, 0));
        }
        // min s  s.t.  G x + s >= h,  s >= 0,  E x = e
        let mut g1 = DMatrix::zeros(m + 1, n + 1);
        g1.view_mut((0, 0), (m, n)).copy_from(&p.ineq_matrix);
        for i in 0..m {
            g1[(i, n)] = 1.0;
        }
        g1[(m, n)] = 1.0;
        let mut h1 = DVector::zeros(m + 1);
        h1.rows_mut(0, m).copy_from(&p.ineq_vector);
        let mut e1 = DMatrix::zeros(p.eq_matrix.nrows(), n + 1);
        e1.view_mut((0, 0), (p.eq_matrix.nrows(), n)).copy_from(&p.eq_matrix);
        let mut q1 = DVector::zeros(n + 1);
        q1[n] = 1.0;
        let lp = QpProblem::new(DMatrix::zeros(n + 1, n + 1), q1)
            .with_inequalities(g1, h1)
            .with_equalities(e1, p.eq_vector.clone());
        let mut x = DVector::zeros(n + 1);
        x.rows_mut(0, n).copy_from(&x0);
        x[n] = viol;
        let lp_solver = ActiveSetSolver { problem: lp, opts: self.opts, hessian: Hessian::Scaled(0.0), state: None };
        let (x, mut w, mut f) = lp_solver.factor_from(x, &[]);
        let mut x = x;
        let (status, iters, _) = run_active_set(
            &lp_solver.problem.q_matrix,
            &lp_solver.problem.q_vector,
            &lp_solver.hessian,
            &lp_solver.problem,
            &mut x,
            &mut w,
            &mut f,
            max_iter,
            tol,
            Some(n),
        )?;
        if x[n] > tol {
            return Ok(match status {
                QpStatus::MaxIter => Phase1::Exhausted(iters),
                _ => Phase1::Infeasible(iters),
            });
        }
        Ok(Phase1::Feasible(x.rows(0, n).into_owned(), iters))
    }
}

fn reduced_step(q: &DMatrix<f64>, hess: &Hessian, f: &Factor, g: &DVector<f64>) -> Step {
    let n = g.len();
    let t = f.t;
    let z = f.qf.columns(t, n - t);
    let zg = z.tr_mul(g);
    let gscale = g.amax().max(1.0);
    match hess {
        Hessian::Scaled(c) if *c > 0.0 => Step::Newton(-(&z * zg) / *c),
        Hessian::Scaled(_) if zg.amax() <= 1e-12 * gscale => Step::Newton(DVector::zeros(n)),
        Hessian::Scaled(_) => Step::Ray(-(&z * zg)),
        _ => {
            let qz = match hess {
                Hessian::Diagonal(d) => {
                    let mut m = z.into_owned();
                    for (i, mut row) in m.row_iter_mut().enumerate() {
                        row *= d[i];
                    }
                    m
                }
                _ => q * z,
            };
            let hz = z.tr_mul(&qz);
            let hmax = hz.diagonal().amax().max(f64::MIN_POSITIVE);
            if let Some(ch) = hz.clone().cholesky() {
                let l = ch.l_dirty();
                let mut lmin = f64::INFINITY;
                for i in 0..l.nrows() {
                    lmin = lmin.min(l[(i, i)] * l[(i, i)]);
                }
                if lmin > 1e-10 * hmax {
                    let pz = ch.solve(&zg);
                    return Step::Newton(-(z * pz));
                }
            }
            let eig = SymmetricEigen::new(hz);
            let lmax = eig.eigenvalues.amax().max(f64::MIN_POSITIVE);
            let cut = 1e-10 * lmax.max(1.0);
            let coef = eig.eigenvectors.tr_mul(&zg);
            let mut null_part = DVector::zeros(coef.len());
            let mut range_part = DVector::zeros(coef.len());
            for i in 0..coef.len() {
                if eig.eigenvalues[i] <= cut {
                    null_part[i] = coef[i];
                } else {
                    range_part[i] = coef[i] / eig.eigenvalues[i];
                }
            }
            if null_part.amax() > 1e-12 * gscale {
                Step::Ray(-(&z * (&eig.eigenvectors * null_part)))
            } else {
                Step::Newton(-(&z * (&eig.eigenvectors * range_part)))
            }
        }
    }
}

/// Core loop from a feasible `x` with factorized working set `w`.
/// `stop_coord` ends early once that coordinate reaches zero (feasibility phase).
#[allow(clippy::too_many_arguments)]
fn run_active_set(
    q: &DMatrix<f64>,
    qv: &DVector<f64>,
    hess: &Hessian,
    p: &QpProblem,
    x: &mut DVector<f64>,
    w: &mut Vec<Row>,
    f: &mut Factor,
    max_iter: usize,
    tol: f64,
    stop_coord: Option<usize>,
) -> Result<(QpStatus, usize, DVector<f64>)> {
    let m = p.ineq_matrix.nrows();
    let drop_tol = (0.01 * tol).max(1e-14);
    let mut in_w = vec![false; m];
    for r in w.iter() {
        if let Row::Ineq(i) = *r {
            in_w[i] = true;
        }
    }
    let mut iters = 0;
    loop {
        let g = match hess {
            Hessian::Scaled(c) => &*x * *c + qv,
            Hessian::Diagonal(d) => x.component_mul(d) + qv,
            Hessian::Dense => q * &*x + qv,
        };
        let step = if f.t == x.len() { Step::Newton(DVector::zeros(x.len())) } else { reduced_step(q, hess, f, &g) };
        let (dir, unbounded) = match step {
            Step::Newton(d) => (d, false),
            Step::Ray(d) => (d, true),
        };
        let xscale = 1.0 + x.amax();
        if !unbounded && dir.amax() <= 1e-13 * xscale {
            let lam = f.multipliers(&g);
            let mut worst: Option<(usize, f64)> = None;
            for (k, r) in w.iter().enumerate() {
                if let Row::Ineq(_) = r {
                    if lam[k] < -drop_tol && worst.is_none_or(|(_, v)| lam[k] < v) {
                        worst = Some((k, lam[k]));
                    }
                }
            }
            match worst {
                None => return Ok((QpStatus::Optimal, iters, lam)),
                Some((k, _)) => {
                    if iters >= max_iter {
                        return Ok((QpStatus::MaxIter, iters, lam));
                    }
                    if let Row::Ineq(i) = w[k] {
                        in_w[i] = false;
                    }
                    w.remove(k);
                    f.remove(k);
                    iters += 1;
                    continue;
                }
            }
        }
        if iters >= max_iter {
            let lam = f.multipliers(&g);
            return Ok((QpStatus::MaxIter, iters, lam));
        }
        let mut alpha = if unbounded { f64::INFINITY } else { 1.0 };
        let mut block: Option<usize> = None;
        if m > 0 {
            let gp = &p.ineq_matrix * &dir;
            let gx = &p.ineq_matrix * &*x;
            let dn = dir.norm();
            for i in 0..m {
                if in_w[i] {
                    continue;
                }
                let rn = p.ineq_matrix.row(i).norm();
                if gp[i] < -1e-14 * rn * dn {
                    let ratio = ((gx[i] - p.ineq_vector[i]).max(0.0)) / (-gp[i]);
                    if ratio < alpha {
                        alpha = ratio;
                        block = Some(i);
                    }
                }
            }
        }
        if alpha.is_infinite() {
            return Err(Error::QpUnbounded);
        }
        x.axpy(alpha, &dir, 1.0);
        iters += 1;
        if let Some(i) = block {
            if f.add(&p.ineq_matrix.row(i).transpose()) {
                w.push(Row::Ineq(i));
                in_w[i] = true;
            } else {
                return Err(Error::Numerical(format!("blocking constraint {i} is dependent on the working set")));
            }
        }
        if let Some(c) = stop_coord {
            if x[c] <= 0.0 {
                x[c] = 0.0;
                let lam = DVector::zeros(w.len());
                return Ok((QpStatus::Optimal, iters, lam));
            }
        }
    }
}
