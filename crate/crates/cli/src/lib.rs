//! Experiment harness for the `ogaprox` solver: dataset loading, the five
//! experiment drivers behind the `ogaprox` binary, and CSV/JSON reports.

pub mod config;
pub mod data;
pub mod error;
pub mod experiments;
pub mod report;
pub mod rng;

pub use error::{HarnessError, Result};
pub use report::{ExperimentOutput, Series};
