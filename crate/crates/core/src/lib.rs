//! Optimistic gradient ascent with proximal x-steps for convex-concave
//! saddle point problems `min_x max_y Phi(x, y) - g(y)`.

pub mod error;
pub mod linalg;
pub mod problem;
pub mod problems;
pub mod prox;
pub mod qp;
pub mod schedule;
pub mod solver;

pub use error::{Error, Result};
pub use problem::{validate_problem, ExtendedReal, ProblemConstants, SaddleProblem, ValidationReport};
pub use schedule::{
    certificates, make_schedule, schedule_advance, CertificateKind, RateCertificate, ScheduleKind, ScheduleState,
};
pub use solver::{
    gap_certificate, minimax_gap, no_metrics, run, step, CertificateCheck, MetricRecord, Metrics, RunError, RunOutput,
    RunReport, SolverState,
};
