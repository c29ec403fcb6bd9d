//! Tabular reinforcement learning with split action values.
//!
//! Three learners share one environment interface:
//!
//! - [`agents::QLearningAgent`]: ordinary ε-greedy Q-learning over `Q(s, a)`.
//! - [`agents::SplitQAgent`]: learns `Q(s, a, s')` per observed successor and
//!   combines it with empirical transition frequencies.
//! - [`agents::UncertainSplitQAgent`]: samples transition probabilities from
//!   their posterior and Q-values from per-entry running statistics, and acts
//!   greedily on the sample.
//!
//! [`layered`] builds the benchmark environments, [`harness`] runs seeded
//! multi-trial experiments, and [`report`] writes reward curves as CSV and SVG.
//! The `examples/` directory has one runnable program per capability:
//!
//! - `layered_env`: generate and serialize an environment
//! - `value_iteration`: solve an MDP and verify the fixed point
//! - `posterior_samplers`: compare the two transition-posterior samplers
//! - `running_stats`: cumulative and exponentially weighted statistics
//! - `split_q_determinism`: split values collapse to zero variance on
//!   deterministic transitions
//! - `uncertain_selection`: exploration driven by posterior sampling
//! - `compare_agents`: a small multi-trial comparison with CSV and SVG output

pub mod agents;
pub mod analysis;
pub mod cli;
pub mod config;
pub mod error;
pub mod harness;
pub mod layered;
pub mod mdp;
pub mod posterior;
pub mod report;
pub mod rng;
pub mod running_stats;

pub use error::{ConfigError, Error, Result};

use sha2::{Digest, Sha256};

/// First 8 bytes of the SHA-256 of `bytes`, as 16 lowercase hex digits.
pub(crate) fn digest_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)[..8].iter().map(|b| format!("{b:02x}")).collect()
}
