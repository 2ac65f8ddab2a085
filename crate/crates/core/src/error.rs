use thiserror::Error;

use crate::qp::QpStatus;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("step-size violation: {0}")]
    StepSizeViolation(String),
    #[error("non-finite iterate at k = {k}")]
    NonFiniteIterate { k: usize },
    #[error("infeasible start: {0}")]
    InfeasibleStart(String),
    #[error("saddle point unknown for this problem")]
    MissingSaddlePoint,
    #[error("psi undefined: {0}")]
    PsiUndefined(String),
    #[error("quadratic program ended with status {status:?} after {iterations} iterations")]
    Qp { status: QpStatus, iterations: usize },
    #[error("qp unbounded below along a zero-curvature direction")]
    QpUnbounded,
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("rank deficient: {0}")]
    RankDeficient(String),
    #[error("prox undefined: objective evaluated to -inf")]
    ProxUndefined,
}
