use rand::Rng;
use rand_distr::StandardNormal;

use super::{AgentConfig, SplitQTable};
use crate::error::{Error, Result};
use crate::mdp::{ActionId, StateId};
use crate::posterior::{sample_into, SamplerStats};

/// Index of the largest value; ties are broken uniformly at random.
/// The generator is only consulted when there is a tie.
pub fn argmax_uniform_ties<R: Rng + ?Sized>(values: &[f64], rng: &mut R) -> usize {
    let mut best = f64::NEG_INFINITY;
    let mut first = 0;
    let mut ties = 0usize;
    for (i, &v) in values.iter().enumerate() {
        if v > best {
            best = v;
            first = i;
            ties = 1;
        } else if v == best {
            ties += 1;
        }
    }
    if ties <= 1 {
        return first;
    }
    let pick = rng.random_range(0..ties);
    values
        .iter()
        .enumerate()
        .filter(|(_, &v)| v == best)
        .nth(pick)
        .map(|(i, _)| i)
        .unwrap_or(first)
}

/// ε-greedy choice over `values`. Exploration is disabled from
/// `epsilon_off_step` onwards.
pub fn select_epsilon_greedy<R: Rng + ?Sized>(
    values: &[f64],
    epsilon: f64,
    step: u64,
    epsilon_off_step: Option<u64>,
    rng: &mut R,
) -> Result<ActionId> {
    if values.is_empty() {
        return Err(Error::invalid("no actions to choose from"));
    }
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::invalid(format!("non-finite action value {v}")));
    }
    let exploring = epsilon_off_step.is_none_or(|off| step < off);
    if exploring && epsilon > 0.0 && rng.random::<f64>() < epsilon {
        return Ok(ActionId(rng.random_range(0..values.len())));
    }
    Ok(ActionId(argmax_uniform_ties(values, rng)))
}

/// Posterior-sampled action selection with reusable scratch buffers.
///
/// For each action: sample successor probabilities from the posterior of
/// its counts (plus the unknown slot), sample each observed `Q(s,a,s')`
/// from a Gaussian around its estimate with the entry's empirical standard
/// deviation (clamped to the admissible return range), value the unknown
/// slot at `q_max`, and take the weighted sum. The action with the largest
/// sampled value wins.
#[derive(Debug, Default, Clone)]
pub struct UncertainSelector {
    counts: Vec<u64>,
    weights: Vec<f64>,
    sampled: Vec<f64>,
    stats: SamplerStats,
}

impl UncertainSelector {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn stats(&self) -> &SamplerStats {
        &self.stats
    }

    pub fn select<R: Rng + ?Sized>(
        &mut self,
        table: &SplitQTable,
        s: StateId,
        cfg: &AgentConfig,
        rng: &mut R,
    ) -> Result<ActionId> {
        table.layout().check_state(s)?;
        let n_actions = table.layout().num_actions(s);
        if n_actions == 0 {
            return Err(Error::invalid(format!("state {} has no actions", s.0)));
        }
        let mut sampled = std::mem::take(&mut self.sampled);
        sampled.clear();
        for a in 0..n_actions {
            sampled.push(self.sample_value(table, s, ActionId(a), cfg, rng)?);
        }
        let choice = argmax_uniform_ties(&sampled, rng);
        self.sampled = sampled;
        Ok(ActionId(choice))
    }

    /// One posterior sample of `Q(s, a)`.
    pub fn sample_value<R: Rng + ?Sized>(
        &mut self,
        table: &SplitQTable,
        s: StateId,
        a: ActionId,
        cfg: &AgentConfig,
        rng: &mut R,
    ) -> Result<f64> {
        let entries = table.entries(s, a)?;
        let q_max = cfg.q_max();
        if entries.is_empty() {
            // All posterior mass sits on the unknown slot (or, without one,
            // nothing is known): the optimistic bound.
            return Ok(q_max);
        }
        let q_min = cfg.q_min();
        let unknown = cfg.unknown_enabled;

        self.counts.clear();
        self.counts.extend(entries.iter().map(|e| e.count()));
        if unknown {
            self.counts.push(0);
        }
        let (proposals, fallback) =
            sample_into(&self.counts, unknown, cfg.sampler, rng, &mut self.weights);
        self.stats.record(proposals, fallback);

        let mut value = 0.0;
        for (e, &w) in entries.iter().zip(&self.weights) {
            let sd = e.accumulator().std_dev(cfg.sigma_init);
            let q = if sd > 0.0 {
                let z: f64 = rng.sample(StandardNormal);
                e.q_value() + sd * z
            } else {
                e.q_value()
            };
            value += w * q.clamp(q_min, q_max);
        }
        if unknown {
            value += self.weights[entries.len()] * q_max;
        }
        Ok(value)
    }
}

/// Convenience wrapper around [`UncertainSelector::select`].
pub fn select_uncertain<R: Rng + ?Sized>(
    table: &SplitQTable,
    s: StateId,
    cfg: &AgentConfig,
    rng: &mut R,
) -> Result<ActionId> {
    UncertainSelector::new().select(table, s, cfg, rng)
}
