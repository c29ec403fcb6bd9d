use super::AgentConfig;
use crate::error::{Error, Result};
use crate::mdp::{ActionId, ActionLayout, ActionValues, StateId};

/// `Q(s, a)` with per-pair visit counts.
#[derive(Debug, Clone, PartialEq)]
pub struct QTable {
    values: ActionValues,
    visits: Vec<u64>,
}

impl QTable {
    pub fn new(layout: ActionLayout, init: f64) -> Self {
        let visits = vec![0; layout.len()];
        Self {
            values: ActionValues::filled(layout, init),
            visits,
        }
    }

    pub fn layout(&self) -> &ActionLayout {
        self.values.layout()
    }

    pub fn values(&self) -> &ActionValues {
        &self.values
    }

    pub fn q(&self, s: StateId, a: ActionId) -> Result<f64> {
        let i = self.layout().index(s, a)?;
        Ok(self.values.values()[i])
    }

    pub fn set(&mut self, s: StateId, a: ActionId, v: f64) -> Result<()> {
        self.values.set(s, a, v)
    }

    pub fn visits(&self, s: StateId, a: ActionId) -> Result<u64> {
        Ok(self.visits[self.layout().index(s, a)?])
    }

    pub fn state_values(&self, s: StateId) -> &[f64] {
        self.values.state_values(s)
    }

    /// `Q(s,a) ← Q(s,a) + α [r + γ max_a' Q(s',a') − Q(s,a)]`.
    pub fn q_update(
        &mut self,
        s: StateId,
        a: ActionId,
        r: f64,
        s_next: StateId,
        cfg: &AgentConfig,
    ) -> Result<()> {
        let i = self.layout().index(s, a)?;
        self.layout().check_state(s_next)?;
        if !r.is_finite() {
            return Err(Error::invalid(format!("non-finite reward {r}")));
        }
        self.visits[i] += 1;
        let alpha = cfg.step_size(self.visits[i]);
        let target = r + cfg.gamma.get() * self.values.max_value(s_next);
        let q = &mut self.values.state_values_mut(s)[a.0];
        *q += alpha * (target - *q);
        Ok(())
    }
}
