//! ChaCha20 streams keyed by `(seed, experiment, run)`.
//!
//! The base seed goes through `ChaCha20Rng::seed_from_u64`; the stream id is
//! `experiment_id << 32 | run`, so every run draws from its own keystream and
//! adding runs never shifts earlier ones.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Toy,
    Mksvm,
    Fairness,
    Synthetic,
    Validate,
}

impl Experiment {
    pub fn id(self) -> u64 {
        match self {
            Experiment::Toy => 1,
            Experiment::Mksvm => 2,
            Experiment::Fairness => 3,
            Experiment::Synthetic => 4,
            Experiment::Validate => 5,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Toy => "toy",
            Experiment::Mksvm => "mksvm",
            Experiment::Fairness => "fairness",
            Experiment::Synthetic => "synthetic",
            Experiment::Validate => "validate",
        }
    }
}

pub fn run_rng(seed: u64, experiment: Experiment, run: u32) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(experiment.id() << 32 | u64::from(run));
    rng
}
