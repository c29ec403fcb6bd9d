use super::AgentConfig;
use crate::error::{Error, Result};
use crate::mdp::{ActionId, ActionLayout, Outcome, StateId};
use crate::posterior::unknown_mass_mean;
use crate::running_stats::{AccumulatorMode, MeanVarAccumulator};

/// Value estimate for one observed `(s, a, s')` transition.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitEntry {
    next_state: StateId,
    q_value: f64,
    accumulator: MeanVarAccumulator,
    count: u64,
}

impl SplitEntry {
    pub fn next_state(&self) -> StateId {
        self.next_state
    }

    pub fn q_value(&self) -> f64 {
        self.q_value
    }

    pub fn accumulator(&self) -> &MeanVarAccumulator {
        &self.accumulator
    }

    pub fn count(&self) -> u64 {
        self.count
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
struct PairEntries {
    entries: Vec<SplitEntry>,
    total: u64,
}

/// `Q(s, a, s')` for every observed successor, with visit counts and a
/// variance accumulator per entry. Unobserved successors are not stored; the
/// unknown-outcome slot is valued at `q_max` on demand.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitQTable {
    layout: ActionLayout,
    pairs: Vec<PairEntries>,
    accumulator: MeanVarAccumulator,
}

impl SplitQTable {
    pub fn new(layout: ActionLayout, accumulator: AccumulatorMode) -> Result<Self> {
        let pairs = vec![PairEntries::default(); layout.len()];
        Ok(Self {
            layout,
            pairs,
            accumulator: MeanVarAccumulator::new(accumulator)?,
        })
    }

    pub fn layout(&self) -> &ActionLayout {
        &self.layout
    }

    /// Observed successors of `(s, a)` in order of first observation.
    pub fn entries(&self, s: StateId, a: ActionId) -> Result<&[SplitEntry]> {
        Ok(&self.pairs[self.layout.index(s, a)?].entries)
    }

    pub fn entry(&self, s: StateId, a: ActionId, next: StateId) -> Result<Option<&SplitEntry>> {
        Ok(self.entries(s, a)?.iter().find(|e| e.next_state == next))
    }

    /// `n(s, a)`.
    pub fn total_count(&self, s: StateId, a: ActionId) -> Result<u64> {
        Ok(self.pairs[self.layout.index(s, a)?].total)
    }

    /// Inserts or overwrites an entry with a given value and count.
    pub fn insert_entry(
        &mut self,
        s: StateId,
        a: ActionId,
        next: StateId,
        q_value: f64,
        count: u64,
    ) -> Result<()> {
        let i = self.layout.index(s, a)?;
        self.layout.check_state(next)?;
        if count == 0 {
            return Err(Error::invalid("split entries need a count of at least 1"));
        }
        let template = self.accumulator;
        let pair = &mut self.pairs[i];
        match pair.entries.iter_mut().find(|e| e.next_state == next) {
            Some(e) => {
                pair.total = pair.total - e.count + count;
                e.q_value = q_value;
                e.count = count;
            }
            None => {
                pair.total += count;
                pair.entries.push(SplitEntry {
                    next_state: next,
                    q_value,
                    accumulator: template,
                    count,
                });
            }
        }
        Ok(())
    }

    /// `Σ_{s'} P̂(s'|s,a) Q(s,a,s')` using `cfg.unknown_enabled`.
    pub fn combine_q(&self, s: StateId, a: ActionId, cfg: &AgentConfig) -> Result<f64> {
        self.combine_q_with(s, a, cfg, cfg.unknown_enabled)
    }

    /// Frequency-weighted value of `(s, a)`. With `unknown` set, the unknown
    /// slot takes mass `1/(n+2)` at value `q_max` and the observed
    /// frequencies share the rest. Returns `q_max` when `n(s,a) = 0`.
    pub fn combine_q_with(
        &self,
        s: StateId,
        a: ActionId,
        cfg: &AgentConfig,
        unknown: bool,
    ) -> Result<f64> {
        let i = self.layout.index(s, a)?;
        Ok(combine_pair(&self.pairs[i], cfg.q_max(), unknown))
    }

    /// Weighted value with caller-supplied successor probabilities (e.g. the
    /// true dynamics). Successors without an entry are valued at `q_max`.
    pub fn combine_q_exact(
        &self,
        s: StateId,
        a: ActionId,
        outcomes: &[Outcome],
        cfg: &AgentConfig,
    ) -> Result<f64> {
        let entries = self.entries(s, a)?;
        let q_max = cfg.q_max();
        Ok(outcomes
            .iter()
            .map(|o| {
                let q = entries
                    .iter()
                    .find(|e| e.next_state == o.next_state)
                    .map_or(q_max, |e| e.q_value);
                o.probability * q
            })
            .sum())
    }

    /// `max_a combine_q(s, a)`.
    pub fn max_combined(&self, s: StateId, cfg: &AgentConfig, unknown: bool) -> f64 {
        let q_max = cfg.q_max();
        self.pairs[self.layout.state_range(s)]
            .iter()
            .map(|p| combine_pair(p, q_max, unknown))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Combined values of every action in `s`, written into `out`.
    pub(crate) fn combined_values(&self, s: StateId, cfg: &AgentConfig, unknown: bool, out: &mut Vec<f64>) {
        let q_max = cfg.q_max();
        out.clear();
        out.extend(
            self.pairs[self.layout.state_range(s)]
                .iter()
                .map(|p| combine_pair(p, q_max, unknown)),
        );
    }

    /// Split update with the bootstrap target evaluated by
    /// [`combine_q`](Self::combine_q) under `cfg.unknown_enabled`.
    pub fn split_q_update(
        &mut self,
        s: StateId,
        a: ActionId,
        r: f64,
        s_next: StateId,
        cfg: &AgentConfig,
    ) -> Result<()> {
        self.split_q_update_with(s, a, r, s_next, cfg, cfg.unknown_enabled)
    }

    /// `Q(s,a,s') ← Q(s,a,s') + α [r + γ max_a' Q(s',a') − Q(s,a,s')]`, where
    /// `Q(s',a')` is the combined value. A new entry starts at `q_max`. The
    /// updated value is pushed into the entry's accumulator.
    pub fn split_q_update_with(
        &mut self,
        s: StateId,
        a: ActionId,
        r: f64,
        s_next: StateId,
        cfg: &AgentConfig,
        unknown: bool,
    ) -> Result<()> {
        let i = self.layout.index(s, a)?;
        self.layout.check_state(s_next)?;
        if !r.is_finite() {
            return Err(Error::invalid(format!("non-finite reward {r}")));
        }
        let target = r + cfg.gamma.get() * self.max_combined(s_next, cfg, unknown);
        let template = self.accumulator;
        let pair = &mut self.pairs[i];
        let pos = match pair.entries.iter().position(|e| e.next_state == s_next) {
            Some(pos) => pos,
            None => {
                pair.entries.push(SplitEntry {
                    next_state: s_next,
                    q_value: cfg.q_max(),
                    accumulator: template,
                    count: 0,
                });
                pair.entries.len() - 1
            }
        };
        pair.total += 1;
        let e = &mut pair.entries[pos];
        e.count += 1;
        let alpha = cfg.step_size(e.count);
        e.q_value += alpha * (target - e.q_value);
        e.accumulator.push_finite(e.q_value);
        Ok(())
    }
}

#[inline]
fn combine_pair(pair: &PairEntries, q_max: f64, unknown: bool) -> f64 {
    if pair.total == 0 {
        return q_max;
    }
    let n = pair.total as f64;
    let weighted: f64 = pair.entries.iter().map(|e| e.count as f64 * e.q_value).sum();
    if unknown {
        let u = unknown_mass_mean(pair.total);
        (1.0 - u) * weighted / n + u * q_max
    } else {
        weighted / n
    }
}
