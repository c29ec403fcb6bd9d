//! Layered benchmark environments.
//!
//! Level 0 holds a single start state; levels `1..=m` hold `n` states each.
//! The start state has `n` actions, action `j` leading deterministically to
//! state `j` of level 1. Every state on levels `1..m` has `k` actions, each
//! with two outcomes landing on two distinct states of the next level with
//! probabilities `(p, 1 - p)`. Every state on level `m` has one action that
//! returns to the start state. Each `(s, a, s')` carries a reward drawn once,
//! uniformly from `[reward_low, reward_high]`.

use rand::Rng;

use crate::error::{Error, Result};
use crate::mdp::{Outcome, StateId, TabularMdp};
use crate::rng::RandomSource;

#[derive(Debug, Clone, PartialEq)]
pub struct LayeredConfig {
    /// Number of levels after the start level.
    pub m: usize,
    /// States per level.
    pub n: usize,
    /// Actions per intermediate state.
    pub k: usize,
    pub reward_low: f64,
    pub reward_high: f64,
    pub seed: u64,
}

impl Default for LayeredConfig {
    fn default() -> Self {
        Self::paper_scale(0)
    }
}

impl LayeredConfig {
    /// `m = 20, n = 10, k = 2` with rewards in `[0, 1]`.
    pub fn paper_scale(seed: u64) -> Self {
        Self {
            m: 20,
            n: 10,
            k: 2,
            reward_low: 0.0,
            reward_high: 1.0,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m < 1 {
            return Err(Error::invalid(format!("m = {} must be >= 1", self.m)));
        }
        if self.n < 2 {
            return Err(Error::invalid(format!("n = {} must be >= 2", self.n)));
        }
        if self.k < 1 {
            return Err(Error::invalid(format!("k = {} must be >= 1", self.k)));
        }
        if !self.reward_low.is_finite() || !self.reward_high.is_finite() {
            return Err(Error::invalid("reward bounds must be finite"));
        }
        if self.reward_low > self.reward_high {
            return Err(Error::invalid(format!(
                "reward_low {} exceeds reward_high {}",
                self.reward_low, self.reward_high
            )));
        }
        Ok(())
    }

    pub fn num_states(&self) -> usize {
        1 + self.m * self.n
    }

    /// Index of state `position` on `level` (level 0 has only position 0).
    pub fn state(&self, level: usize, position: usize) -> StateId {
        if level == 0 {
            StateId(0)
        } else {
            StateId(1 + (level - 1) * self.n + position)
        }
    }

    pub fn level_of(&self, s: StateId) -> usize {
        if s.0 == 0 {
            0
        } else {
            1 + (s.0 - 1) / self.n
        }
    }
}

/// Builds the layered MDP described by `cfg`. Pure function of `cfg`.
pub fn generate(cfg: &LayeredConfig) -> Result<TabularMdp> {
    cfg.validate()?;
    let mut rng = RandomSource::from_seed(cfg.seed);
    let reward = |rng: &mut RandomSource| rng.random_range(cfg.reward_low..=cfg.reward_high);

    let mut transitions: Vec<Vec<Vec<Outcome>>> = Vec::with_capacity(cfg.num_states());

    let start = (0..cfg.n)
        .map(|j| vec![Outcome::new(cfg.state(1, j).0, 1.0, reward(&mut rng))])
        .collect();
    transitions.push(start);

    for level in 1..=cfg.m {
        for _ in 0..cfg.n {
            if level == cfg.m {
                transitions.push(vec![vec![Outcome::new(0, 1.0, reward(&mut rng))]]);
                continue;
            }
            let actions = (0..cfg.k)
                .map(|_| {
                    let targets = rand::seq::index::sample(&mut rng, cfg.n, 2);
                    let p = loop {
                        let p: f64 = rng.random();
                        if p > 0.0 && p < 1.0 {
                            break p;
                        }
                    };
                    let first = cfg.state(level + 1, targets.index(0)).0;
                    let second = cfg.state(level + 1, targets.index(1)).0;
                    vec![
                        Outcome::new(first, p, reward(&mut rng)),
                        Outcome::new(second, 1.0 - p, reward(&mut rng)),
                    ]
                })
                .collect();
            transitions.push(actions);
        }
    }

    let mdp = TabularMdp::new(transitions);
    debug_assert!(mdp.validate().is_valid());
    Ok(mdp)
}
