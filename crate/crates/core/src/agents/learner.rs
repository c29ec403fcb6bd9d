use super::{select_epsilon_greedy, AgentConfig, AgentKind, QTable, SplitQTable, UncertainSelector};
use crate::error::Result;
use crate::mdp::{ActionId, ActionLayout, StateId};
use crate::posterior::SamplerStats;
use crate::rng::RandomSource;

/// A sequential learner interacting with one environment.
pub trait Learner: Send {
    fn kind(&self) -> AgentKind;

    fn config(&self) -> &AgentConfig;

    fn select_action(&mut self, s: StateId, step: u64, rng: &mut RandomSource) -> Result<ActionId>;

    fn update(&mut self, s: StateId, a: ActionId, r: f64, s_next: StateId, step: u64) -> Result<()>;

    /// The agent's current point estimate of `Q(s, a)`.
    fn action_value(&self, s: StateId, a: ActionId) -> Result<f64>;

    fn sampler_stats(&self) -> SamplerStats {
        SamplerStats::default()
    }
}

/// Ordinary Q-learning with ε-greedy exploration and optimistic start values.
#[derive(Debug, Clone)]
pub struct QLearningAgent {
    cfg: AgentConfig,
    table: QTable,
}

impl QLearningAgent {
    pub fn new(cfg: AgentConfig, actions_per_state: &[usize]) -> Self {
        let table = QTable::new(ActionLayout::new(actions_per_state), cfg.q_max());
        Self { cfg, table }
    }

    pub fn table(&self) -> &QTable {
        &self.table
    }

    pub fn table_mut(&mut self) -> &mut QTable {
        &mut self.table
    }
}

impl Learner for QLearningAgent {
    fn kind(&self) -> AgentKind {
        AgentKind::QLearning
    }

    fn config(&self) -> &AgentConfig {
        &self.cfg
    }

    fn select_action(&mut self, s: StateId, step: u64, rng: &mut RandomSource) -> Result<ActionId> {
        self.table.layout().check_state(s)?;
        select_epsilon_greedy(
            self.table.state_values(s),
            self.cfg.epsilon,
            step,
            self.cfg.epsilon_off_step,
            rng,
        )
    }

    fn update(&mut self, s: StateId, a: ActionId, r: f64, s_next: StateId, _step: u64) -> Result<()> {
        self.table.q_update(s, a, r, s_next, &self.cfg)
    }

    fn action_value(&self, s: StateId, a: ActionId) -> Result<f64> {
        self.table.q(s, a)
    }
}

/// Split Q-learning with ε-greedy exploration over combined values.
///
/// While exploration is on, the unknown-outcome slot follows
/// `cfg.unknown_enabled`; once ε is switched off the agent acts and
/// bootstraps on plain observed frequencies.
#[derive(Debug, Clone)]
pub struct SplitQAgent {
    cfg: AgentConfig,
    table: SplitQTable,
    scratch: Vec<f64>,
}

impl SplitQAgent {
    pub fn new(cfg: AgentConfig, actions_per_state: &[usize]) -> Result<Self> {
        let table = SplitQTable::new(ActionLayout::new(actions_per_state), cfg.accumulator_mode())?;
        Ok(Self {
            cfg,
            table,
            scratch: Vec::new(),
        })
    }

    pub fn table(&self) -> &SplitQTable {
        &self.table
    }

    pub fn table_mut(&mut self) -> &mut SplitQTable {
        &mut self.table
    }

    fn unknown_at(&self, step: u64) -> bool {
        self.cfg.unknown_enabled && self.cfg.epsilon_active(step)
    }
}

impl Learner for SplitQAgent {
    fn kind(&self) -> AgentKind {
        AgentKind::SplitQ
    }

    fn config(&self) -> &AgentConfig {
        &self.cfg
    }

    fn select_action(&mut self, s: StateId, step: u64, rng: &mut RandomSource) -> Result<ActionId> {
        self.table.layout().check_state(s)?;
        let unknown = self.unknown_at(step);
        self.table.combined_values(s, &self.cfg, unknown, &mut self.scratch);
        select_epsilon_greedy(&self.scratch, self.cfg.epsilon, step, self.cfg.epsilon_off_step, rng)
    }

    fn update(&mut self, s: StateId, a: ActionId, r: f64, s_next: StateId, step: u64) -> Result<()> {
        let unknown = self.unknown_at(step);
        self.table.split_q_update_with(s, a, r, s_next, &self.cfg, unknown)
    }

    fn action_value(&self, s: StateId, a: ActionId) -> Result<f64> {
        self.table.combine_q_with(s, a, &self.cfg, false)
    }
}

/// Split Q-learning that explores by acting greedily on one posterior
/// sample of every action value. No ε schedule applies.
#[derive(Debug, Clone)]
pub struct UncertainSplitQAgent {
    cfg: AgentConfig,
    table: SplitQTable,
    selector: UncertainSelector,
}

impl UncertainSplitQAgent {
    pub fn new(cfg: AgentConfig, actions_per_state: &[usize]) -> Result<Self> {
        let table = SplitQTable::new(ActionLayout::new(actions_per_state), cfg.accumulator_mode())?;
        Ok(Self {
            cfg,
            table,
            selector: UncertainSelector::new(),
        })
    }

    pub fn table(&self) -> &SplitQTable {
        &self.table
    }
}

impl Learner for UncertainSplitQAgent {
    fn kind(&self) -> AgentKind {
        AgentKind::UncertainSplitQ
    }

    fn config(&self) -> &AgentConfig {
        &self.cfg
    }

    fn select_action(&mut self, s: StateId, _step: u64, rng: &mut RandomSource) -> Result<ActionId> {
        self.selector.select(&self.table, s, &self.cfg, rng)
    }

    fn update(&mut self, s: StateId, a: ActionId, r: f64, s_next: StateId, _step: u64) -> Result<()> {
        self.table.split_q_update(s, a, r, s_next, &self.cfg)
    }

    fn action_value(&self, s: StateId, a: ActionId) -> Result<f64> {
        self.table.combine_q(s, a, &self.cfg)
    }

    fn sampler_stats(&self) -> SamplerStats {
        *self.selector.stats()
    }
}
