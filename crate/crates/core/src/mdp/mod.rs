//! Ground-truth tabular MDPs: representation, validation, simulation, and a
//! synchronous value-iteration solver used as a test oracle.

mod format;

use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};

pub use format::{read_mdp, write_mdp, MDP_SCHEMA};

/// Default sweep cap for [`value_iteration`].
pub const DEFAULT_MAX_SWEEPS: usize = 100_000;

/// Tolerance on per-(s,a) probability sums.
pub const PROBABILITY_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StateId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ActionId(pub usize);

impl fmt::Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s{}", self.0)
    }
}

impl fmt::Display for ActionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "a{}", self.0)
    }
}

/// One possible result of taking an action: successor, its probability and
/// the (deterministic) reward of that transition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Outcome {
    pub next_state: StateId,
    pub probability: f64,
    pub reward: f64,
}

impl Outcome {
    pub fn new(next_state: usize, probability: f64, reward: f64) -> Self {
        Self {
            next_state: StateId(next_state),
            probability,
            reward,
        }
    }
}

/// Discount factor in `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct DiscountFactor(f64);

impl DiscountFactor {
    pub fn new(gamma: f64) -> Result<Self> {
        if (0.0..1.0).contains(&gamma) {
            Ok(Self(gamma))
        } else {
            Err(Error::invalid(format!("discount factor {gamma} not in [0, 1)")))
        }
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }
}

/// A finite MDP. Immutable once built; share it freely between threads.
///
/// `transitions[s][a]` lists the outcomes of action `a` in state `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularMdp {
    transitions: Vec<Vec<Vec<Outcome>>>,
}

/// Dense `(state, action)` indexing for tables whose action count varies by state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionLayout {
    offsets: Vec<usize>,
}

impl ActionLayout {
    pub fn new(actions_per_state: &[usize]) -> Self {
        let mut offsets = Vec::with_capacity(actions_per_state.len() + 1);
        let mut acc = 0;
        offsets.push(0);
        for &n in actions_per_state {
            acc += n;
            offsets.push(acc);
        }
        Self { offsets }
    }

    pub fn num_states(&self) -> usize {
        self.offsets.len() - 1
    }

    #[inline]
    pub fn num_actions(&self, s: StateId) -> usize {
        self.offsets[s.0 + 1] - self.offsets[s.0]
    }

    /// Total number of `(s, a)` pairs.
    pub fn len(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Flat index of `(s, a)`, or an invalid-argument error when out of range.
    #[inline]
    pub fn index(&self, s: StateId, a: ActionId) -> Result<usize> {
        if s.0 >= self.num_states() {
            return Err(Error::invalid(format!(
                "state {} out of range ({} states)",
                s.0,
                self.num_states()
            )));
        }
        let n = self.num_actions(s);
        if a.0 >= n {
            return Err(Error::invalid(format!(
                "action {} out of range for state {} ({n} actions)",
                a.0, s.0
            )));
        }
        Ok(self.offsets[s.0] + a.0)
    }

    #[inline]
    pub(crate) fn state_range(&self, s: StateId) -> std::ops::Range<usize> {
        self.offsets[s.0]..self.offsets[s.0 + 1]
    }

    pub fn check_state(&self, s: StateId) -> Result<()> {
        if s.0 < self.num_states() {
            Ok(())
        } else {
            Err(Error::invalid(format!(
                "state {} out of range ({} states)",
                s.0,
                self.num_states()
            )))
        }
    }
}

/// A real value per `(s, a)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionValues {
    layout: ActionLayout,
    values: Vec<f64>,
}

impl ActionValues {
    pub fn filled(layout: ActionLayout, value: f64) -> Self {
        let values = vec![value; layout.len()];
        Self { layout, values }
    }

    pub fn layout(&self) -> &ActionLayout {
        &self.layout
    }

    /// Unchecked-range accessor; panics on invalid indices.
    pub fn get(&self, s: StateId, a: ActionId) -> f64 {
        self.values[self.layout.index(s, a).expect("index in range")]
    }

    pub fn set(&mut self, s: StateId, a: ActionId, v: f64) -> Result<()> {
        let i = self.layout.index(s, a)?;
        self.values[i] = v;
        Ok(())
    }

    #[inline]
    pub fn state_values(&self, s: StateId) -> &[f64] {
        &self.values[self.layout.state_range(s)]
    }

    #[inline]
    pub(crate) fn state_values_mut(&mut self, s: StateId) -> &mut [f64] {
        let r = self.layout.state_range(s);
        &mut self.values[r]
    }

    /// `max_a Q(s, a)`.
    #[inline]
    pub fn max_value(&self, s: StateId) -> f64 {
        self.state_values(s)
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Lowest-index maximizing action.
    pub fn greedy_action(&self, s: StateId) -> ActionId {
        let vals = self.state_values(s);
        let mut best = 0;
        for (i, &v) in vals.iter().enumerate() {
            if v > vals[best] {
                best = i;
            }
        }
        ActionId(best)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Largest absolute entry-wise difference.
    pub fn max_abs_diff(&self, other: &ActionValues) -> f64 {
        assert_eq!(self.layout, other.layout, "layouts differ");
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// A single invariant violation found by [`TabularMdp::validate`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NoStates,
    NoActions { state: usize },
    NoOutcomes { state: usize, action: usize },
    ProbabilitySum { state: usize, action: usize, sum: f64 },
    NonPositiveProbability { state: usize, action: usize, probability: f64 },
    DanglingNextState { state: usize, action: usize, next_state: usize },
    NonFiniteReward { state: usize, action: usize, reward: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Violation::NoStates => write!(f, "MDP has no states"),
            Violation::NoActions { state } => write!(f, "(s{state}): state has no actions"),
            Violation::NoOutcomes { state, action } => {
                write!(f, "(s{state}, a{action}): action has no outcomes")
            }
            Violation::ProbabilitySum { state, action, sum } => {
                write!(f, "(s{state}, a{action}): probabilities sum to {sum}")
            }
            Violation::NonPositiveProbability {
                state,
                action,
                probability,
            } => write!(
                f,
                "(s{state}, a{action}): probability {probability} outside (0, 1]"
            ),
            Violation::DanglingNextState {
                state,
                action,
                next_state,
            } => write!(f, "(s{state}, a{action}): dangling next_state {next_state}"),
            Violation::NonFiniteReward {
                state,
                action,
                reward,
            } => write!(f, "(s{state}, a{action}): non-finite reward {reward}"),
        }
    }
}

/// Every violated invariant, in `(s, a)` order. Empty iff the MDP is valid.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn into_result(self) -> Result<()> {
        if self.is_valid() {
            Ok(())
        } else {
            let msgs: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
            Err(Error::InvalidMdp(msgs.join("; ")))
        }
    }
}

impl TabularMdp {
    /// Builds without checking invariants; call [`validate`](Self::validate).
    pub fn new(transitions: Vec<Vec<Vec<Outcome>>>) -> Self {
        Self { transitions }
    }

    /// Builds and rejects any MDP with a non-empty validation report.
    pub fn try_new(transitions: Vec<Vec<Vec<Outcome>>>) -> Result<Self> {
        let mdp = Self::new(transitions);
        mdp.validate().into_result()?;
        Ok(mdp)
    }

    pub fn num_states(&self) -> usize {
        self.transitions.len()
    }

    pub fn num_actions(&self, s: StateId) -> usize {
        self.transitions[s.0].len()
    }

    pub fn actions_per_state(&self) -> Vec<usize> {
        self.transitions.iter().map(Vec::len).collect()
    }

    pub fn layout(&self) -> ActionLayout {
        ActionLayout::new(&self.actions_per_state())
    }

    pub fn outcomes(&self, s: StateId, a: ActionId) -> Result<&[Outcome]> {
        self.transitions
            .get(s.0)
            .ok_or_else(|| {
                Error::invalid(format!(
                    "state {} out of range ({} states)",
                    s.0,
                    self.num_states()
                ))
            })?
            .get(a.0)
            .map(Vec::as_slice)
            .ok_or_else(|| {
                Error::invalid(format!(
                    "action {} out of range for state {} ({} actions)",
                    a.0,
                    s.0,
                    self.transitions[s.0].len()
                ))
            })
    }

    pub(crate) fn transitions(&self) -> &[Vec<Vec<Outcome>>] {
        &self.transitions
    }

    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        let n = self.num_states();
        if n == 0 {
            violations.push(Violation::NoStates);
        }
        for (s, actions) in self.transitions.iter().enumerate() {
            if actions.is_empty() {
                violations.push(Violation::NoActions { state: s });
            }
            for (a, outcomes) in actions.iter().enumerate() {
                if outcomes.is_empty() {
                    violations.push(Violation::NoOutcomes { state: s, action: a });
                    continue;
                }
                let mut sum = 0.0;
                for o in outcomes {
                    sum += o.probability;
                    if !(o.probability > 0.0 && o.probability <= 1.0) {
                        violations.push(Violation::NonPositiveProbability {
                            state: s,
                            action: a,
                            probability: o.probability,
                        });
                    }
                    if o.next_state.0 >= n {
                        violations.push(Violation::DanglingNextState {
                            state: s,
                            action: a,
                            next_state: o.next_state.0,
                        });
                    }
                    if !o.reward.is_finite() {
                        violations.push(Violation::NonFiniteReward {
                            state: s,
                            action: a,
                            reward: o.reward,
                        });
                    }
                }
                if !sum.is_finite() || (sum - 1.0).abs() > PROBABILITY_SUM_TOLERANCE {
                    violations.push(Violation::ProbabilitySum {
                        state: s,
                        action: a,
                        sum,
                    });
                }
            }
        }
        ValidationReport { violations }
    }

    /// Draws a successor of `(s, a)` and returns it with its reward.
    pub fn sample_transition<R: Rng + ?Sized>(
        &self,
        s: StateId,
        a: ActionId,
        rng: &mut R,
    ) -> Result<(StateId, f64)> {
        let outcomes = self.outcomes(s, a)?;
        let last = outcomes
            .last()
            .ok_or_else(|| Error::invalid(format!("({s}, {a}) has no outcomes")))?;
        if outcomes.len() == 1 {
            return Ok((last.next_state, last.reward));
        }
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for o in outcomes {
            acc += o.probability;
            if u < acc {
                return Ok((o.next_state, o.reward));
            }
        }
        Ok((last.next_state, last.reward))
    }

    /// `Σ_{s'} P(s'|s,a) R(s,a,s')`.
    pub fn expected_reward(&self, s: StateId, a: ActionId) -> Result<f64> {
        Ok(self
            .outcomes(s, a)?
            .iter()
            .map(|o| o.probability * o.reward)
            .sum())
    }

    /// Returns a copy with `c` added to every reward.
    pub fn shift_rewards(&self, c: f64) -> Self {
        let mut out = self.clone();
        for o in out.transitions.iter_mut().flatten().flatten() {
            o.reward += c;
        }
        out
    }

    /// Content digest of the mdp-v1 serialization (16 hex chars).
    pub fn digest(&self) -> String {
        crate::digest_hex(write_mdp(self).as_bytes())
    }
}

/// One synchronous Bellman optimality backup of `q`.
pub fn bellman_backup(mdp: &TabularMdp, gamma: DiscountFactor, q: &ActionValues) -> ActionValues {
    let g = gamma.get();
    let mut out = q.clone();
    let mut i = 0;
    for actions in mdp.transitions() {
        for outcomes in actions {
            out.values[i] = outcomes
                .iter()
                .map(|o| o.probability * (o.reward + g * q.max_value(o.next_state)))
                .sum();
            i += 1;
        }
    }
    out
}

/// `max_{s,a} |Q - backup(Q)|`.
pub fn bellman_residual(mdp: &TabularMdp, gamma: DiscountFactor, q: &ActionValues) -> f64 {
    q.max_abs_diff(&bellman_backup(mdp, gamma, q))
}

/// Optimal action values by synchronous value iteration, capped at
/// [`DEFAULT_MAX_SWEEPS`].
pub fn value_iteration(mdp: &TabularMdp, gamma: DiscountFactor, tol: f64) -> Result<ActionValues> {
    value_iteration_capped(mdp, gamma, tol, DEFAULT_MAX_SWEEPS)
}

/// Value iteration with an explicit sweep cap. The returned table satisfies
/// `bellman_residual(..) <= tol`; exceeding the cap is an error.
pub fn value_iteration_capped(
    mdp: &TabularMdp,
    gamma: DiscountFactor,
    tol: f64,
    max_sweeps: usize,
) -> Result<ActionValues> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::invalid(format!("tolerance must be positive, got {tol}")));
    }
    mdp.validate().into_result()?;
    let mut q = ActionValues::filled(mdp.layout(), 0.0);
    let mut residual = f64::INFINITY;
    for _ in 0..max_sweeps {
        let next = bellman_backup(mdp, gamma, &q);
        residual = next.max_abs_diff(&q);
        q = next;
        // `q` is now one sweep past a table whose residual was <= tol, so its
        // own residual is at most gamma * tol.
        if residual <= tol {
            return Ok(q);
        }
    }
    Err(Error::NonConvergence {
        sweeps: max_sweeps,
        residual,
    })
}
