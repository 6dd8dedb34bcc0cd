//! Scenario generators and the Monte-Carlo harness.
//!
//! Every replicate draws from its own `ChaCha8Rng`, seeded by
//! [`child_seed`]`(master, scenario_index, replicate)`, so results do not
//! depend on the number of worker threads.

mod adversarial;
mod campaign;
mod config;
mod microarray;
mod ttest;

pub use adversarial::adversarial_null_evalues;
pub use campaign::{
    run_campaign, run_replicate, CampaignResult, CampaignRow, NullAudit, ReplicateRecord,
};
pub use config::SimulationConfig;
pub use microarray::{generate_microarray_replicate, MicroarrayScenario};
pub use ttest::{generate_ttest_replicate, TTestScenario};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;

/// One simulated dataset with ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateData {
    pub p: Vec<f64>,
    pub e: Vec<f64>,
    pub is_null: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Scenario {
    #[serde(rename = "ttest")]
    TTest(TTestScenario),
    Microarray(MicroarrayScenario),
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        match self {
            Scenario::TTest(s) => s.validate(),
            Scenario::Microarray(s) => s.validate(),
        }
    }

    pub fn seed(&self) -> u64 {
        match self {
            Scenario::TTest(s) => s.seed,
            Scenario::Microarray(s) => s.seed,
        }
    }

    pub fn set_seed(&mut self, seed: u64) {
        match self {
            Scenario::TTest(s) => s.seed = seed,
            Scenario::Microarray(s) => s.seed = seed,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Scenario::TTest(_) => "ttest",
            Scenario::Microarray(_) => "microarray",
        }
    }

    pub fn k(&self) -> usize {
        match self {
            Scenario::TTest(s) => s.k,
            Scenario::Microarray(s) => s.k,
        }
    }

    pub fn null_fraction(&self) -> f64 {
        match self {
            Scenario::TTest(s) => s.null_fraction,
            Scenario::Microarray(s) => s.null_fraction,
        }
    }

    pub fn xi(&self) -> f64 {
        match self {
            Scenario::TTest(s) => s.xi,
            Scenario::Microarray(s) => s.xi,
        }
    }

    pub fn generate(&self, rng: &mut ChaCha8Rng) -> Result<ReplicateData> {
        match self {
            Scenario::TTest(s) => generate_ttest_replicate(s, rng),
            Scenario::Microarray(s) => generate_microarray_replicate(s, rng),
        }
    }
}

impl From<TTestScenario> for Scenario {
    fn from(s: TTestScenario) -> Self {
        Scenario::TTest(s)
    }
}

impl From<MicroarrayScenario> for Scenario {
    fn from(s: MicroarrayScenario) -> Self {
        Scenario::Microarray(s)
    }
}

/// SplitMix64 finalizer.
fn avalanche(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// Seed of replicate `replicate` of scenario `scenario_index`.
pub fn child_seed(master: u64, scenario_index: u64, replicate: u64) -> u64 {
    let mut h = avalanche(master.wrapping_add(GOLDEN));
    h = avalanche(h ^ avalanche(scenario_index.wrapping_add(GOLDEN.wrapping_mul(2))));
    avalanche(h ^ avalanche(replicate.wrapping_add(GOLDEN.wrapping_mul(3))))
}

pub fn replicate_rng(master: u64, scenario_index: u64, replicate: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(child_seed(master, scenario_index, replicate))
}

/// Number of nulls, `round(k * null_fraction)`; nulls occupy the leading indices.
pub(crate) fn null_count(k: usize, null_fraction: f64) -> usize {
    ((k as f64 * null_fraction).round() as usize).min(k)
}
