//! Independent, seeded trials of several agents on fresh layered
//! environments, aggregated into per-step reward curves.
//!
//! Trial `t` gets an environment seeded with
//! `derive_seed(master_seed, t, role::ENVIRONMENT)`; agent `i` in that trial
//! runs from `derive_seed(derive_seed(master_seed, t, role::AGENT), i, role::AGENT)`.
//! Every agent of a trial sees the same environment. Trials run on a rayon
//! pool in chunks and are folded into the aggregate strictly in trial order,
//! so results do not depend on the number of workers.

use rayon::prelude::*;

use crate::agents::{AgentConfig, AgentKind, Learner};
use crate::error::{ConfigError, Error, Result};
use crate::layered::{generate, LayeredConfig};
use crate::mdp::{StateId, TabularMdp};
use crate::posterior::SamplerStats;
use crate::rng::{derive_seed, role, RandomSource};
use crate::running_stats::MeanVarAccumulator;

#[derive(Debug, Clone, PartialEq)]
pub struct AgentSpec {
    pub name: String,
    pub kind: AgentKind,
    pub config: AgentConfig,
}

impl AgentSpec {
    pub fn new(name: impl Into<String>, kind: AgentKind, config: AgentConfig) -> Self {
        Self {
            name: name.into(),
            kind,
            config,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub env: LayeredConfig,
    pub agents: Vec<AgentSpec>,
    pub steps: u64,
    pub trials: u64,
    pub master_seed: u64,
    /// Block width for plotted curves; stored CSV data is never smoothed.
    pub smoothing_window: usize,
    pub output_path: String,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let invalid = |msg: String| Err(Error::Config(ConfigError::Invalid(msg)));
        if let Err(e) = self.env.validate() {
            return invalid(format!("[environment]: {e}"));
        }
        if self.agents.is_empty() {
            return invalid("at least one agent section is required".into());
        }
        for (i, a) in self.agents.iter().enumerate() {
            if a.name.is_empty()
                || !a.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
            {
                return invalid(format!(
                    "agent name `{}` must be non-empty ASCII letters, digits, `_` or `-`",
                    a.name
                ));
            }
            if self.agents[..i].iter().any(|b| b.name == a.name) {
                return invalid(format!("duplicate agent name `{}`", a.name));
            }
            if let Err(e) = a.config.validate() {
                return invalid(format!("[agent.{}]: {e}", a.name));
            }
        }
        if self.steps < 1 {
            return invalid("steps must be >= 1".into());
        }
        if self.trials < 1 {
            return invalid("trials must be >= 1".into());
        }
        if self.smoothing_window < 1 {
            return invalid("smoothing_window must be >= 1".into());
        }
        Ok(())
    }

    /// Environment configuration of trial `t`.
    pub fn trial_env(&self, trial: u64) -> LayeredConfig {
        LayeredConfig {
            seed: derive_seed(self.master_seed, trial, role::ENVIRONMENT),
            ..self.env.clone()
        }
    }

    /// Seed of agent `agent_index` in trial `t`.
    pub fn trial_agent_seed(&self, trial: u64, agent_index: usize) -> u64 {
        derive_seed(
            derive_seed(self.master_seed, trial, role::AGENT),
            agent_index as u64,
            role::AGENT,
        )
    }
}

/// Per-step statistics of one agent over all trials.
#[derive(Debug, Clone, PartialEq)]
pub struct RewardCurve {
    pub agent: String,
    pub steps: Vec<u64>,
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
    pub config_digest: String,
}

impl RewardCurve {
    pub fn len(&self) -> usize {
        self.mean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean.is_empty()
    }

    /// Non-overlapping block means of width `window`; each point is placed
    /// at its block's first step. The final block may be shorter.
    pub fn smoothed(&self, window: usize) -> RewardCurve {
        let window = window.max(1);
        if window == 1 {
            return self.clone();
        }
        let block_mean = |xs: &[f64]| -> Vec<f64> {
            xs.chunks(window)
                .map(|c| c.iter().sum::<f64>() / c.len() as f64)
                .collect()
        };
        RewardCurve {
            agent: self.agent.clone(),
            steps: self.steps.chunks(window).map(|c| c[0]).collect(),
            mean: block_mean(&self.mean),
            stderr: block_mean(&self.stderr),
            config_digest: self.config_digest.clone(),
        }
    }
}

/// One agent's trajectory in one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRun {
    pub rewards: Vec<f64>,
    pub sampler: SamplerStats,
    /// Digest of the environment the agent ran on.
    pub env_digest: String,
}

/// All agents' runs for one trial, in configured agent order.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub trial: u64,
    pub env_digest: String,
    pub runs: Vec<TrialRun>,
}

/// Steps `agent` through `env` from state 0 for `steps` steps and returns
/// the realized rewards. Policy and dynamics draw from separate streams.
///
/// On failure returns the failing step with the error.
pub fn simulate(
    env: &TabularMdp,
    agent: &mut dyn Learner,
    steps: u64,
    policy_rng: &mut RandomSource,
    dynamics_rng: &mut RandomSource,
) -> std::result::Result<Vec<f64>, (u64, Error)> {
    let mut rewards = Vec::with_capacity(steps as usize);
    let mut s = StateId(0);
    for t in 0..steps {
        let a = agent.select_action(s, t, policy_rng).map_err(|e| (t, e))?;
        let (next, r) = env.sample_transition(s, a, dynamics_rng).map_err(|e| (t, e))?;
        agent.update(s, a, r, next, t).map_err(|e| (t, e))?;
        rewards.push(r);
        s = next;
    }
    Ok(rewards)
}

/// One trial of one agent. Fully determined by `(env, spec, steps, trial_seed)`.
pub fn run_trial(env: &TabularMdp, spec: &AgentSpec, steps: u64, trial_seed: u64) -> Result<TrialRun> {
    let mut agent = spec.kind.build(&spec.config, &env.actions_per_state())?;
    let mut policy_rng = RandomSource::from_seed(derive_seed(trial_seed, 0, role::POLICY));
    let mut dynamics_rng = RandomSource::from_seed(derive_seed(trial_seed, 0, role::DYNAMICS));
    let rewards = simulate(env, agent.as_mut(), steps, &mut policy_rng, &mut dynamics_rng).map_err(
        |(step, source)| Error::TrialAborted {
            trial: 0,
            agent: spec.name.clone(),
            step,
            source: Box::new(source),
        },
    )?;
    Ok(TrialRun {
        rewards,
        sampler: agent.sampler_stats(),
        env_digest: env.digest(),
    })
}

fn run_trial_record(cfg: &ExperimentConfig, trial: u64) -> Result<TrialRecord> {
    let env = generate(&cfg.trial_env(trial))?;
    let runs = cfg
        .agents
        .iter()
        .enumerate()
        .map(|(i, spec)| {
            run_trial(&env, spec, cfg.steps, cfg.trial_agent_seed(trial, i)).map_err(|e| match e {
                Error::TrialAborted {
                    agent, step, source, ..
                } => Error::TrialAborted {
                    trial,
                    agent,
                    step,
                    source,
                },
                other => Error::TrialAborted {
                    trial,
                    agent: spec.name.clone(),
                    step: 0,
                    source: Box::new(other),
                },
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TrialRecord {
        trial,
        env_digest: env.digest(),
        runs,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentDiagnostics {
    pub agent: String,
    pub sampler: SamplerStats,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    pub trials: u64,
    pub steps: u64,
    pub config_digest: String,
    pub agents: Vec<AgentDiagnostics>,
}

impl Diagnostics {
    /// Stable plain-text summary.
    pub fn render(&self) -> String {
        let mut out = format!(
            "config_digest = {}\ntrials = {}\nsteps = {}\n",
            self.config_digest, self.trials, self.steps
        );
        for a in &self.agents {
            out.push_str(&format!(
                "agent {}: posterior_draws = {}, proposals = {}, sampler_fallbacks = {}\n",
                a.agent, a.sampler.draws, a.sampler.proposals, a.sampler.fallbacks
            ));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    /// Raw (unsmoothed) curves, one per agent in configured order.
    pub curves: Vec<RewardCurve>,
    pub diagnostics: Diagnostics,
}

/// Runs the whole experiment on `workers` threads (0 = rayon default).
pub fn run_experiment(cfg: &ExperimentConfig, workers: usize) -> Result<ExperimentReport> {
    run_experiment_with(cfg, workers, |_| {})
}

/// Like [`run_experiment`], additionally handing every trial record to
/// `sink` in trial order.
pub fn run_experiment_with<F>(cfg: &ExperimentConfig, workers: usize, mut sink: F) -> Result<ExperimentReport>
where
    F: FnMut(&TrialRecord),
{
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::invalid(format!("cannot start worker pool: {e}")))?;
    let chunk = (pool.current_num_threads().max(1) * 4) as u64;
    let steps = cfg.steps as usize;

    let mut per_step: Vec<Vec<MeanVarAccumulator>> =
        vec![vec![MeanVarAccumulator::cumulative(); steps]; cfg.agents.len()];
    let mut sampler = vec![SamplerStats::default(); cfg.agents.len()];

    let mut start = 0;
    while start < cfg.trials {
        let end = (start + chunk).min(cfg.trials);
        let records: Vec<Result<TrialRecord>> =
            pool.install(|| (start..end).into_par_iter().map(|t| run_trial_record(cfg, t)).collect());
        for record in records {
            let record = record?;
            for (i, run) in record.runs.iter().enumerate() {
                for (acc, &r) in per_step[i].iter_mut().zip(&run.rewards) {
                    acc.push_finite(r);
                }
                sampler[i].merge(&run.sampler);
            }
            sink(&record);
        }
        start = end;
    }

    let digest = cfg.digest();
    let n = cfg.trials as f64;
    let curves = cfg
        .agents
        .iter()
        .zip(&per_step)
        .map(|(spec, accs)| RewardCurve {
            agent: spec.name.clone(),
            steps: (0..cfg.steps).collect(),
            mean: accs.iter().map(MeanVarAccumulator::mean).collect(),
            stderr: accs.iter().map(|a| (a.sample_variance() / n).sqrt()).collect(),
            config_digest: digest.clone(),
        })
        .collect();
    let diagnostics = Diagnostics {
        trials: cfg.trials,
        steps: cfg.steps,
        config_digest: digest,
        agents: cfg
            .agents
            .iter()
            .zip(sampler)
            .map(|(spec, sampler)| AgentDiagnostics {
                agent: spec.name.clone(),
                sampler,
            })
            .collect(),
    };
    Ok(ExperimentReport { curves, diagnostics })
}

/// Per-step mean and standard error over trials of equal length, computed
/// from stored sequences in trial order.
pub fn aggregate(agent: &str, trials: &[Vec<f64>]) -> Result<RewardCurve> {
    let len = trials.first().map_or(0, Vec::len);
    if trials.is_empty() || trials.iter().any(|t| t.len() != len) {
        return Err(Error::invalid("aggregate needs at least one trial, all of equal length"));
    }
    let n = trials.len() as f64;
    let mut accs = vec![MeanVarAccumulator::cumulative(); len];
    for t in trials {
        for (acc, &r) in accs.iter_mut().zip(t) {
            acc.push(r)?;
        }
    }
    Ok(RewardCurve {
        agent: agent.to_string(),
        steps: (0..len as u64).collect(),
        mean: accs.iter().map(MeanVarAccumulator::mean).collect(),
        stderr: accs.iter().map(|a| (a.sample_variance() / n).sqrt()).collect(),
        config_digest: String::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::{QLearningAgent, SplitQAgent};
    use crate::mdp::{ActionId, DiscountFactor, Outcome};
    use rand::Rng;

    fn small_experiment(trials: u64, steps: u64) -> ExperimentConfig {
        let base = AgentConfig {
            sampler: crate::posterior::SamplerMode::ExactDirichlet,
            epsilon_off_step: Some(steps / 2),
            ..AgentConfig::default()
        };
        ExperimentConfig {
            env: LayeredConfig {
                m: 3,
                n: 3,
                k: 2,
                reward_low: 0.0,
                reward_high: 1.0,
                seed: 0,
            },
            agents: vec![
                AgentSpec::new("q", AgentKind::QLearning, base.clone()),
                AgentSpec::new("split", AgentKind::SplitQ, base.clone()),
                AgentSpec::new("uncertain", AgentKind::UncertainSplitQ, base),
            ],
            steps,
            trials,
            master_seed: 11,
            smoothing_window: 10,
            output_path: "out".into(),
        }
    }

    #[test]
    fn two_point_aggregation() {
        let c = aggregate("a", &[vec![1.0, 1.0, 1.0], vec![3.0, 3.0, 3.0]]).unwrap();
        assert_eq!(c.mean, vec![2.0; 3]);
        assert_eq!(c.stderr, vec![1.0; 3]);
        assert!(aggregate("a", &[vec![1.0], vec![]]).is_err());
    }

    #[test]
    fn deterministic_chain_rewards_in_order() {
        // 0 -> 1 -> 2 -> 0 with rewards 0.2, 0.5, 0.9.
        let env = TabularMdp::try_new(vec![
            vec![vec![Outcome::new(1, 1.0, 0.2)]],
            vec![vec![Outcome::new(2, 1.0, 0.5)]],
            vec![vec![Outcome::new(0, 1.0, 0.9)]],
        ])
        .unwrap();
        let cfg = AgentConfig {
            epsilon: 0.0,
            ..AgentConfig::default()
        };
        let spec = AgentSpec::new("greedy", AgentKind::SplitQ, cfg);
        let run = run_trial(&env, &spec, 5, 1).unwrap();
        assert_eq!(run.rewards, vec![0.2, 0.5, 0.9, 0.2, 0.5]);
    }

    #[test]
    fn same_seed_same_rewards() {
        let cfg = small_experiment(1, 300);
        let env = generate(&cfg.trial_env(0)).unwrap();
        for spec in &cfg.agents {
            let a = run_trial(&env, spec, 300, 42).unwrap();
            let b = run_trial(&env, spec, 300, 42).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn four_step_hand_trace() {
        // s0 -> {s1: p .5, r 1; s2: p .5, r 0}; s1 -> s0 (r .25); s2 -> s0 (r .75).
        let env = TabularMdp::try_new(vec![
            vec![vec![Outcome::new(1, 0.5, 1.0), Outcome::new(2, 0.5, 0.0)]],
            vec![vec![Outcome::new(0, 1.0, 0.25)]],
            vec![vec![Outcome::new(0, 1.0, 0.75)]],
        ])
        .unwrap();
        let cfg = AgentConfig {
            alpha: 1.0,
            gamma: DiscountFactor::new(0.0).unwrap(),
            epsilon: 0.0,
            ..AgentConfig::default()
        };
        let mut agent = QLearningAgent::new(cfg, &env.actions_per_state());
        let mut policy = RandomSource::from_seed(1);
        let mut dynamics = RandomSource::from_seed(2);
        let rewards = simulate(&env, &mut agent, 4, &mut policy, &mut dynamics).unwrap();

        // Scripted draws: the dynamics stream is consulted only at s0.
        let mut script = RandomSource::from_seed(2);
        let first = |u: f64| if u < 0.5 { (1usize, 1.0, 0.25) } else { (2usize, 0.0, 0.75) };
        let (s_a, r0, r1) = first(script.random::<f64>());
        let (s_b, r2, r3) = first(script.random::<f64>());
        assert_eq!(rewards, vec![r0, r1, r2, r3]);

        // α = 1, γ = 0: each visited entry holds its latest reward; the
        // rest keep the optimistic start r_max / (1 - γ) = 1.
        let t = agent.table();
        assert_eq!(t.q(StateId(0), ActionId(0)).unwrap(), r2);
        let mut expect = [1.0, 1.0];
        expect[s_a - 1] = r1;
        expect[s_b - 1] = r3;
        assert_eq!(t.q(StateId(1), ActionId(0)).unwrap(), expect[0]);
        assert_eq!(t.q(StateId(2), ActionId(0)).unwrap(), expect[1]);
    }

    #[test]
    fn experiment_matches_naive_aggregation() {
        let cfg = small_experiment(6, 200);
        let mut stored: Vec<Vec<Vec<f64>>> = vec![Vec::new(); cfg.agents.len()];
        let report = run_experiment_with(&cfg, 2, |rec| {
            for (i, run) in rec.runs.iter().enumerate() {
                stored[i].push(run.rewards.clone());
            }
        })
        .unwrap();
        for (i, curve) in report.curves.iter().enumerate() {
            let naive: Vec<f64> = (0..200)
                .map(|t| stored[i].iter().map(|r| r[t]).sum::<f64>() / 6.0)
                .collect();
            for (a, b) in curve.mean.iter().zip(&naive) {
                assert!((a - b).abs() < 1e-12);
            }
            assert!(curve.stderr.iter().all(|&s| s >= 0.0));
            assert_eq!(curve.len(), 200);
        }
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let cfg = small_experiment(9, 150);
        let one = run_experiment(&cfg, 1).unwrap();
        let many = run_experiment(&cfg, 8).unwrap();
        assert_eq!(one, many);
    }

    #[test]
    fn agents_share_each_trial_environment() {
        let cfg = small_experiment(5, 50);
        let mut digests = Vec::new();
        run_experiment_with(&cfg, 1, |rec| {
            for run in &rec.runs {
                assert_eq!(run.env_digest, rec.env_digest);
            }
            digests.push(rec.env_digest.clone());
        })
        .unwrap();
        digests.dedup();
        assert_eq!(digests.len(), 5, "every trial draws a fresh environment");
    }

    #[test]
    fn smoothing() {
        let c = aggregate("a", &[vec![1.0, 2.0, 3.0, 4.0, 5.0]]).unwrap();
        assert_eq!(c.smoothed(1), c);
        let s = c.smoothed(2);
        assert_eq!(s.steps, vec![0, 2, 4]);
        assert_eq!(s.mean, vec![1.5, 3.5, 5.0]);
    }

    #[test]
    fn validation() {
        let mut cfg = small_experiment(1, 10);
        assert!(cfg.validate().is_ok());
        cfg.agents[1].name = "q".into();
        assert!(cfg.validate().is_err());
        let mut cfg = small_experiment(1, 10);
        cfg.agents[0].name = "a,b".into();
        assert!(cfg.validate().is_err());
        let mut cfg = small_experiment(1, 10);
        cfg.trials = 0;
        assert!(cfg.validate().is_err());
        let mut cfg = small_experiment(1, 10);
        cfg.agents.clear();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn step_errors_carry_context() {
        // An agent built for a smaller environment fails on its first update.
        let env = TabularMdp::try_new(vec![
            vec![vec![Outcome::new(1, 1.0, 0.0)]],
            vec![vec![Outcome::new(0, 1.0, 0.0)]],
        ])
        .unwrap();
        let mut agent = SplitQAgent::new(AgentConfig::default(), &[1]).unwrap();
        let mut p = RandomSource::from_seed(0);
        let mut d = RandomSource::from_seed(1);
        let (step, _) = simulate(&env, &mut agent, 3, &mut p, &mut d).unwrap_err();
        assert_eq!(step, 0);
    }
}
