//! The three learners: ordinary Q-learning, split Q-learning over
//! `Q(s, a, s')`, and split Q-learning with posterior-sampled action
//! selection.

mod learner;
mod qtable;
mod select;
mod split;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::mdp::DiscountFactor;
use crate::posterior::SamplerMode;
use crate::running_stats::AccumulatorMode;

pub use learner::{Learner, QLearningAgent, SplitQAgent, UncertainSplitQAgent};
pub use qtable::QTable;
pub use select::{argmax_uniform_ties, select_epsilon_greedy, select_uncertain, UncertainSelector};
pub use split::{SplitEntry, SplitQTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AgentKind {
    QLearning,
    SplitQ,
    UncertainSplitQ,
}

impl AgentKind {
    pub fn build(self, cfg: &AgentConfig, actions_per_state: &[usize]) -> Result<Box<dyn Learner>> {
        cfg.validate()?;
        Ok(match self {
            AgentKind::QLearning => Box::new(QLearningAgent::new(cfg.clone(), actions_per_state)),
            AgentKind::SplitQ => Box::new(SplitQAgent::new(cfg.clone(), actions_per_state)?),
            AgentKind::UncertainSplitQ => {
                Box::new(UncertainSplitQAgent::new(cfg.clone(), actions_per_state)?)
            }
        })
    }
}

impl fmt::Display for AgentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AgentKind::QLearning => "q_learning",
            AgentKind::SplitQ => "split_q",
            AgentKind::UncertainSplitQ => "uncertain_split_q",
        })
    }
}

impl FromStr for AgentKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "q_learning" => Ok(AgentKind::QLearning),
            "split_q" => Ok(AgentKind::SplitQ),
            "uncertain_split_q" => Ok(AgentKind::UncertainSplitQ),
            other => Err(format!(
                "unknown agent `{other}` (expected q_learning, split_q or uncertain_split_q)"
            )),
        }
    }
}

/// Step-size schedule. `count` is the visit count of the entry being
/// updated, including the current visit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlphaSchedule {
    /// Always `alpha`.
    Constant,
    /// `1 / count`.
    InverseCount,
    /// `1 / count^power`.
    InversePower(f64),
}

impl AlphaSchedule {
    #[inline]
    pub fn step_size(self, alpha: f64, count: u64) -> f64 {
        match self {
            AlphaSchedule::Constant => alpha,
            AlphaSchedule::InverseCount => 1.0 / count.max(1) as f64,
            AlphaSchedule::InversePower(w) => (count.max(1) as f64).powf(-w),
        }
    }
}

impl fmt::Display for AlphaSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlphaSchedule::Constant => f.write_str("constant"),
            AlphaSchedule::InverseCount => f.write_str("inverse_count"),
            AlphaSchedule::InversePower(w) => write!(f, "inverse_power:{w}"),
        }
    }
}

impl FromStr for AlphaSchedule {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "constant" => Ok(AlphaSchedule::Constant),
            "inverse_count" => Ok(AlphaSchedule::InverseCount),
            _ => {
                let w = s
                    .strip_prefix("inverse_power:")
                    .and_then(|w| w.parse::<f64>().ok())
                    .ok_or_else(|| {
                        format!(
                            "unknown schedule `{s}` (expected constant, inverse_count or inverse_power:<w>)"
                        )
                    })?;
                if w > 0.0 && w <= 1.0 {
                    Ok(AlphaSchedule::InversePower(w))
                } else {
                    Err(format!("inverse_power exponent {w} not in (0, 1]"))
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AccumulatorKind {
    Ewma,
    Cumulative,
}

impl fmt::Display for AccumulatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AccumulatorKind::Ewma => "ewma",
            AccumulatorKind::Cumulative => "cumulative",
        })
    }
}

impl FromStr for AccumulatorKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "ewma" => Ok(AccumulatorKind::Ewma),
            "cumulative" => Ok(AccumulatorKind::Cumulative),
            other => Err(format!("unknown accumulator `{other}` (expected ewma or cumulative)")),
        }
    }
}

/// Every free parameter of the learners.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentConfig {
    /// Learning rate in `(0, 1]` (used by [`AlphaSchedule::Constant`]).
    pub alpha: f64,
    pub alpha_schedule: AlphaSchedule,
    pub gamma: DiscountFactor,
    /// Exploration probability in `[0, 1]`; ignored by the uncertain agent.
    pub epsilon: f64,
    /// First step at which ε-greedy exploration is switched off.
    pub epsilon_off_step: Option<u64>,
    /// Largest possible one-step reward.
    pub r_max: f64,
    /// Smallest possible one-step reward.
    pub r_min: f64,
    /// Prior standard deviation for split entries with fewer than two samples.
    pub sigma_init: f64,
    pub ewma_beta: f64,
    pub accumulator: AccumulatorKind,
    pub sampler: SamplerMode,
    /// Reserve an optimistic unknown-outcome slot per `(s, a)`.
    pub unknown_enabled: bool,
}

impl Default for AgentConfig {
    fn default() -> Self {
        let gamma = DiscountFactor::new(0.9).expect("valid");
        Self {
            alpha: 0.1,
            alpha_schedule: AlphaSchedule::Constant,
            gamma,
            epsilon: 0.1,
            epsilon_off_step: None,
            r_max: 1.0,
            r_min: 0.0,
            sigma_init: default_sigma_init(0.0, 1.0, gamma),
            ewma_beta: 0.1,
            accumulator: AccumulatorKind::Ewma,
            sampler: SamplerMode::PaperRejection,
            unknown_enabled: true,
        }
    }
}

/// Half the admissible return range: `(q_max - q_min) / 2`.
pub fn default_sigma_init(r_min: f64, r_max: f64, gamma: DiscountFactor) -> f64 {
    (r_max - r_min) / (1.0 - gamma.get()) / 2.0
}

/// `r_max / (1 - gamma)`: the largest discounted return, used to initialize
/// every value estimate and to value unobserved outcomes.
pub fn optimistic_q_max(cfg: &AgentConfig) -> f64 {
    cfg.r_max / (1.0 - cfg.gamma.get())
}

impl AgentConfig {
    pub fn q_max(&self) -> f64 {
        optimistic_q_max(self)
    }

    pub fn q_min(&self) -> f64 {
        self.r_min / (1.0 - self.gamma.get())
    }

    #[inline]
    pub fn step_size(&self, count: u64) -> f64 {
        self.alpha_schedule.step_size(self.alpha, count)
    }

    /// Whether ε-greedy exploration is still on at `step`.
    #[inline]
    pub fn epsilon_active(&self, step: u64) -> bool {
        self.epsilon_off_step.is_none_or(|off| step < off)
    }

    pub fn accumulator_mode(&self) -> AccumulatorMode {
        match self.accumulator {
            AccumulatorKind::Ewma => AccumulatorMode::Ewma {
                beta: self.ewma_beta,
            },
            AccumulatorKind::Cumulative => AccumulatorMode::Cumulative,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: String| Err(Error::invalid(what));
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return bad(format!("alpha {} not in (0, 1]", self.alpha));
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return bad(format!("epsilon {} not in [0, 1]", self.epsilon));
        }
        if !self.r_min.is_finite() || !self.r_max.is_finite() || self.r_min > self.r_max {
            return bad(format!(
                "reward bounds [{}, {}] must be finite with r_min <= r_max",
                self.r_min, self.r_max
            ));
        }
        if !(self.sigma_init >= 0.0 && self.sigma_init.is_finite()) {
            return bad(format!("sigma_init {} must be finite and >= 0", self.sigma_init));
        }
        if !(self.ewma_beta > 0.0 && self.ewma_beta <= 1.0) {
            return bad(format!("ewma_beta {} not in (0, 1]", self.ewma_beta));
        }
        if let AlphaSchedule::InversePower(w) = self.alpha_schedule {
            if !(w > 0.0 && w <= 1.0) {
                return bad(format!("inverse_power exponent {w} not in (0, 1]"));
            }
        }
        Ok(())
    }
}
