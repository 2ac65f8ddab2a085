//! Model problems.

mod bilinear;
mod fairness;
mod mksvm;
mod quadratic;
mod toy;

pub use bilinear::BilinearProblem;
pub use fairness::FairnessProblem;
pub use mksvm::{kernel_matrix, normalize_kernel, KernelKind, MkSvmProblem, Prediction};
pub use quadratic::QuadraticScsc;
pub use toy::ToyProblem;
