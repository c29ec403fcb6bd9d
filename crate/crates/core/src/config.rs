//! Experiment configuration files.
//!
//! Line-based `key = value` pairs grouped under `[environment]`,
//! `[agent.NAME]` (one per agent, in run order) and `[experiment]`
//! sections. `#` starts a comment. Several `key=value` pairs may share a
//! line when none of them contains spaces. Unknown keys are errors.
//!
//! ```text
//! [environment]
//! m = 5
//! n = 4
//!
//! [agent.split]
//! agent = split_q
//! epsilon_off_step = 10000
//!
//! [experiment]
//! trials = 1000
//! steps = 20000
//! ```
//!
//! Absent keys take their defaults. Agent reward bounds default to the
//! environment's reward range, `ewma_beta` to the agent's `alpha` and
//! `sigma_init` to half the range of admissible returns.
//! [`render_config`] writes the fully resolved form, which parses back to an
//! identical [`ExperimentConfig`].

use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use crate::agents::{default_sigma_init, AccumulatorKind, AgentConfig, AgentKind, AlphaSchedule};
use crate::error::{ConfigError, Result};
use crate::harness::{AgentSpec, ExperimentConfig};
use crate::layered::LayeredConfig;
use crate::mdp::DiscountFactor;
use crate::posterior::SamplerMode;

pub const DEFAULT_STEPS: u64 = 20_000;
pub const DEFAULT_TRIALS: u64 = 1_000;
pub const DEFAULT_SMOOTHING_WINDOW: usize = 100;
pub const DEFAULT_OUTPUT_PATH: &str = "out";

/// Reads and parses the config file at `path`.
pub fn parse_config(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| {
        if source.kind() == std::io::ErrorKind::NotFound {
            ConfigError::MissingFile { path: path.to_path_buf() }
        } else {
            ConfigError::Unreadable {
                path: path.to_path_buf(),
                source,
            }
        }
    })?;
    parse_config_str(&text)
}

#[derive(Default)]
struct RawAgent {
    name: String,
    line: usize,
    kind: Option<AgentKind>,
    alpha: Option<f64>,
    alpha_schedule: Option<AlphaSchedule>,
    gamma: Option<f64>,
    epsilon: Option<f64>,
    epsilon_off_step: Option<Option<u64>>,
    r_max: Option<f64>,
    r_min: Option<f64>,
    sigma_init: Option<f64>,
    ewma_beta: Option<f64>,
    accumulator: Option<AccumulatorKind>,
    sampler: Option<SamplerMode>,
    unknown_enabled: Option<bool>,
}

enum Section {
    None,
    Environment,
    Experiment,
    Agent(usize),
}

struct Entry<'a> {
    line: usize,
    key: &'a str,
    value: &'a str,
}

impl Entry<'_> {
    fn syntax(&self, message: impl Into<String>) -> ConfigError {
        ConfigError::Syntax {
            line: self.line,
            message: message.into(),
        }
    }

    fn out_of_range(&self, bound: &str) -> ConfigError {
        ConfigError::OutOfRange {
            line: self.line,
            key: self.key.to_string(),
            value: self.value.to_string(),
            bound: bound.to_string(),
        }
    }

    fn parsed<T: FromStr>(&self, what: &str) -> Result<T, ConfigError> {
        self.value
            .parse()
            .map_err(|_| self.syntax(format!("`{}` expects {what}, got `{}`", self.key, self.value)))
    }

    fn choice<T: FromStr<Err = String>>(&self) -> Result<T, ConfigError> {
        self.value.parse().map_err(|e: String| self.syntax(e))
    }

    fn integer(&self) -> Result<u64, ConfigError> {
        let digits: String = self.value.chars().filter(|&c| c != '_').collect();
        digits
            .parse()
            .map_err(|_| self.syntax(format!("`{}` expects a non-negative integer, got `{}`", self.key, self.value)))
    }

    fn integer_at_least(&self, min: u64) -> Result<u64, ConfigError> {
        let v = self.integer()?;
        if v < min {
            return Err(self.out_of_range(&format!(">= {min}")));
        }
        Ok(v)
    }

    fn real(&self) -> Result<f64, ConfigError> {
        let v: f64 = self.parsed("a number")?;
        if !v.is_finite() {
            return Err(self.out_of_range("finite"));
        }
        Ok(v)
    }

    fn real_in(&self, ok: impl Fn(f64) -> bool, bound: &str) -> Result<f64, ConfigError> {
        let v = self.real()?;
        if !ok(v) {
            return Err(self.out_of_range(bound));
        }
        Ok(v)
    }

    fn boolean(&self) -> Result<bool, ConfigError> {
        match self.value {
            "true" => Ok(true),
            "false" => Ok(false),
            _ => Err(self.syntax(format!("`{}` expects true or false, got `{}`", self.key, self.value))),
        }
    }

    fn unknown(&self, section: &str) -> ConfigError {
        ConfigError::UnknownKey {
            line: self.line,
            section: section.to_string(),
            key: self.key.to_string(),
        }
    }
}

fn strip_comment(line: &str) -> &str {
    let mut prev_space = true;
    for (i, c) in line.char_indices() {
        if c == '#' && prev_space {
            return &line[..i];
        }
        prev_space = c.is_whitespace();
    }
    line
}

fn unquote(v: &str) -> &str {
    v.strip_prefix('"').and_then(|v| v.strip_suffix('"')).unwrap_or(v)
}

fn split_entries(line: usize, text: &str) -> Result<Vec<Entry<'_>>, ConfigError> {
    let tokens: Vec<&str> = text.split_whitespace().collect();
    if tokens.len() > 1 && tokens.iter().all(|t| t.contains('=') && !t.starts_with('=')) {
        return Ok(tokens
            .iter()
            .map(|t| {
                let (k, v) = t.split_once('=').expect("checked");
                Entry { line, key: k, value: v }
            })
            .collect());
    }
    let Some((k, v)) = text.split_once('=') else {
        return Err(ConfigError::Syntax {
            line,
            message: format!("expected `key = value`, got `{text}`"),
        });
    };
    let (key, value) = (k.trim(), unquote(v.trim()));
    if key.is_empty() || key.contains(char::is_whitespace) {
        return Err(ConfigError::Syntax {
            line,
            message: format!("malformed key `{key}`"),
        });
    }
    Ok(vec![Entry { line, key, value }])
}

/// Parses config text. See the module docs for the grammar.
pub fn parse_config_str(text: &str) -> Result<ExperimentConfig> {
    let mut env = LayeredConfig::default();
    let mut steps = DEFAULT_STEPS;
    let mut trials = DEFAULT_TRIALS;
    let mut master_seed = 0;
    let mut smoothing_window = DEFAULT_SMOOTHING_WINDOW;
    let mut output_path = DEFAULT_OUTPUT_PATH.to_string();
    let mut agents: Vec<RawAgent> = Vec::new();
    let mut section = Section::None;

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = strip_comment(raw).trim();
        if body.is_empty() {
            continue;
        }
        if let Some(header) = body.strip_prefix('[') {
            let Some(name) = header.strip_suffix(']') else {
                return Err(ConfigError::Syntax {
                    line,
                    message: format!("unterminated section header `{body}`"),
                }
                .into());
            };
            let name = name.trim();
            section = match name {
                "environment" => Section::Environment,
                "experiment" => Section::Experiment,
                "agent" => {
                    agents.push(RawAgent { line, ..RawAgent::default() });
                    Section::Agent(agents.len() - 1)
                }
                _ => match name.strip_prefix("agent.") {
                    Some(agent) => {
                        agents.push(RawAgent {
                            name: agent.trim().to_string(),
                            line,
                            ..RawAgent::default()
                        });
                        Section::Agent(agents.len() - 1)
                    }
                    None => {
                        return Err(ConfigError::Syntax {
                            line,
                            message: format!(
                                "unknown section [{name}] (expected environment, agent.NAME or experiment)"
                            ),
                        }
                        .into())
                    }
                },
            };
            continue;
        }
        for e in split_entries(line, body)? {
            match section {
                Section::None => {
                    return Err(e.syntax(format!("`{}` appears before any section header", e.key)).into())
                }
                Section::Environment => match e.key {
                    "m" => env.m = e.integer_at_least(1)? as usize,
                    "n" => env.n = e.integer_at_least(2)? as usize,
                    "k" => env.k = e.integer_at_least(1)? as usize,
                    "reward_low" => env.reward_low = e.real()?,
                    "reward_high" => env.reward_high = e.real()?,
                    "seed" => env.seed = e.integer()?,
                    _ => return Err(e.unknown("environment").into()),
                },
                Section::Experiment => match e.key {
                    "steps" => steps = e.integer_at_least(1)?,
                    "trials" => trials = e.integer_at_least(1)?,
                    "master_seed" => master_seed = e.integer()?,
                    "smoothing_window" => smoothing_window = e.integer_at_least(1)? as usize,
                    "output_path" => output_path = e.value.to_string(),
                    _ => return Err(e.unknown("experiment").into()),
                },
                Section::Agent(idx) => {
                    let a = &mut agents[idx];
                    match e.key {
                        "agent" => a.kind = Some(e.choice()?),
                        "alpha" => a.alpha = Some(e.real_in(|v| v > 0.0 && v <= 1.0, "in (0, 1]")?),
                        "alpha_schedule" => a.alpha_schedule = Some(e.choice()?),
                        "gamma" => a.gamma = Some(e.real_in(|v| (0.0..1.0).contains(&v), "in [0, 1)")?),
                        "epsilon" => a.epsilon = Some(e.real_in(|v| (0.0..=1.0).contains(&v), "in [0, 1]")?),
                        "epsilon_off_step" => {
                            a.epsilon_off_step = Some(match e.value {
                                "never" => None,
                                _ => Some(e.integer()?),
                            })
                        }
                        "r_max" => a.r_max = Some(e.real()?),
                        "r_min" => a.r_min = Some(e.real()?),
                        "sigma_init" => a.sigma_init = Some(e.real_in(|v| v >= 0.0, ">= 0")?),
                        "ewma_beta" => a.ewma_beta = Some(e.real_in(|v| v > 0.0 && v <= 1.0, "in (0, 1]")?),
                        "accumulator" => a.accumulator = Some(e.choice()?),
                        "sampler" => a.sampler = Some(e.choice()?),
                        "unknown_enabled" => a.unknown_enabled = Some(e.boolean()?),
                        _ => {
                            let section = if a.name.is_empty() {
                                "agent".to_string()
                            } else {
                                format!("agent.{}", a.name)
                            };
                            return Err(e.unknown(&section).into());
                        }
                    }
                }
            }
        }
    }

    let agents = agents
        .into_iter()
        .map(|raw| resolve_agent(raw, &env))
        .collect::<Result<Vec<_>>>()?;
    let cfg = ExperimentConfig {
        env,
        agents,
        steps,
        trials,
        master_seed,
        smoothing_window,
        output_path,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn resolve_agent(raw: RawAgent, env: &LayeredConfig) -> Result<AgentSpec> {
    let Some(kind) = raw.kind else {
        return Err(ConfigError::Invalid(format!(
            "agent section at line {} has no `agent = q_learning | split_q | uncertain_split_q`",
            raw.line
        ))
        .into());
    };
    let name = if raw.name.is_empty() { kind.to_string() } else { raw.name };
    let d = AgentConfig::default();
    let gamma = DiscountFactor::new(raw.gamma.unwrap_or(d.gamma.get()))?;
    let alpha = raw.alpha.unwrap_or(d.alpha);
    let r_max = raw.r_max.unwrap_or(env.reward_high);
    let r_min = raw.r_min.unwrap_or(env.reward_low);
    if r_min > r_max {
        return Err(ConfigError::Invalid(format!(
            "[agent.{name}]: r_min {r_min} exceeds r_max {r_max}"
        ))
        .into());
    }
    let config = AgentConfig {
        alpha,
        alpha_schedule: raw.alpha_schedule.unwrap_or(d.alpha_schedule),
        gamma,
        epsilon: raw.epsilon.unwrap_or(d.epsilon),
        epsilon_off_step: raw.epsilon_off_step.unwrap_or(d.epsilon_off_step),
        r_max,
        r_min,
        sigma_init: raw.sigma_init.unwrap_or(default_sigma_init(r_min, r_max, gamma)),
        ewma_beta: raw.ewma_beta.unwrap_or(alpha),
        accumulator: raw.accumulator.unwrap_or(d.accumulator),
        sampler: raw.sampler.unwrap_or(d.sampler),
        unknown_enabled: raw.unknown_enabled.unwrap_or(d.unknown_enabled),
    };
    Ok(AgentSpec { name, kind, config })
}

fn kv(out: &mut String, key: &str, value: impl Display) {
    out.push_str(&format!("{key} = {value}\n"));
}

/// The fully resolved configuration, every key explicit.
pub fn render_config(cfg: &ExperimentConfig) -> String {
    let mut out = String::from("# resolved experiment configuration\n\n[environment]\n");
    kv(&mut out, "m", cfg.env.m);
    kv(&mut out, "n", cfg.env.n);
    kv(&mut out, "k", cfg.env.k);
    kv(&mut out, "reward_low", cfg.env.reward_low);
    kv(&mut out, "reward_high", cfg.env.reward_high);
    kv(&mut out, "seed", cfg.env.seed);
    for a in &cfg.agents {
        let c = &a.config;
        out.push_str(&format!("\n[agent.{}]\n", a.name));
        kv(&mut out, "agent", a.kind);
        kv(&mut out, "alpha", c.alpha);
        kv(&mut out, "alpha_schedule", c.alpha_schedule);
        kv(&mut out, "gamma", c.gamma.get());
        kv(&mut out, "epsilon", c.epsilon);
        match c.epsilon_off_step {
            Some(t) => kv(&mut out, "epsilon_off_step", t),
            None => kv(&mut out, "epsilon_off_step", "never"),
        }
        kv(&mut out, "r_max", c.r_max);
        kv(&mut out, "r_min", c.r_min);
        kv(&mut out, "sigma_init", c.sigma_init);
        kv(&mut out, "ewma_beta", c.ewma_beta);
        kv(&mut out, "accumulator", c.accumulator);
        kv(&mut out, "sampler", c.sampler);
        kv(&mut out, "unknown_enabled", c.unknown_enabled);
    }
    out.push_str("\n[experiment]\n");
    kv(&mut out, "steps", cfg.steps);
    kv(&mut out, "trials", cfg.trials);
    kv(&mut out, "master_seed", cfg.master_seed);
    kv(&mut out, "smoothing_window", cfg.smoothing_window);
    kv(&mut out, "output_path", &cfg.output_path);
    out
}

impl ExperimentConfig {
    /// Digest of the resolved configuration text.
    pub fn digest(&self) -> String {
        crate::digest_hex(render_config(self).as_bytes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    fn config_err(text: &str) -> ConfigError {
        match parse_config_str(text).unwrap_err() {
            Error::Config(e) => e,
            other => panic!("expected a config error, got {other:?}"),
        }
    }

    #[test]
    fn minimal_config_fills_defaults() {
        let cfg = parse_config_str("[environment]\nm=2 n=2 k=2 seed=1\n\n[agent.a]\nagent = split_q\n").unwrap();
        assert_eq!((cfg.env.m, cfg.env.n, cfg.env.k, cfg.env.seed), (2, 2, 2, 1));
        assert_eq!((cfg.env.reward_low, cfg.env.reward_high), (0.0, 1.0));
        assert_eq!(cfg.steps, DEFAULT_STEPS);
        assert_eq!(cfg.trials, DEFAULT_TRIALS);
        assert_eq!(cfg.smoothing_window, 100);
        let a = &cfg.agents[0];
        assert_eq!(a.name, "a");
        assert_eq!(a.kind, AgentKind::SplitQ);
        let c = &a.config;
        assert_eq!((c.alpha, c.gamma.get(), c.epsilon), (0.1, 0.9, 0.1));
        assert_eq!(c.ewma_beta, c.alpha);
        assert_eq!((c.r_min, c.r_max), (0.0, 1.0));
        assert!((c.sigma_init - 5.0).abs() < 1e-12);
        assert_eq!(c.epsilon_off_step, None);
        assert_eq!(c.sampler, SamplerMode::PaperRejection);
        assert_eq!(c.accumulator, AccumulatorKind::Ewma);
        assert!(c.unknown_enabled);
    }

    #[test]
    fn beta_follows_alpha_unless_set() {
        let cfg = parse_config_str("[agent.a]\nagent = split_q\nalpha = 0.25\n[agent.b]\nagent = split_q\nalpha = 0.25\newma_beta = 0.5\n").unwrap();
        assert_eq!(cfg.agents[0].config.ewma_beta, 0.25);
        assert_eq!(cfg.agents[1].config.ewma_beta, 0.5);
    }

    #[test]
    fn resolved_echo_round_trips() {
        let text = "\
[environment]
m = 3
n = 4
reward_low = -0.5
reward_high = 2.25
seed = 7

[agent.q]
agent = q_learning
epsilon = 0.3
epsilon_off_step = 1_000

[agent.u]  # trailing comment
agent = uncertain_split_q
sampler = exact_dirichlet
alpha_schedule = inverse_power:0.6
accumulator = cumulative
unknown_enabled = false
gamma = 0.95

[experiment]
steps = 500
trials = 3
master_seed = 18446744073709551615
output_path = \"results/run 1\"
";
        let cfg = parse_config_str(text).unwrap();
        assert_eq!(cfg.output_path, "results/run 1");
        assert_eq!(cfg.agents[0].config.epsilon_off_step, Some(1000));
        assert_eq!(cfg.agents[1].config.alpha_schedule, AlphaSchedule::InversePower(0.6));
        let echoed = render_config(&cfg);
        let again = parse_config_str(&echoed).unwrap();
        assert_eq!(cfg, again);
        assert_eq!(render_config(&again), echoed);
    }

    #[test]
    fn unknown_keys_are_errors() {
        assert!(matches!(
            config_err("[agent.a]\nagent = split_q\nlearning_rate = 0.1\n"),
            ConfigError::UnknownKey { line: 3, .. }
        ));
        assert!(matches!(config_err("[environment]\nsize = 3\n"), ConfigError::UnknownKey { .. }));
        assert!(matches!(config_err("[experiment]\nworkers = 3\n"), ConfigError::UnknownKey { .. }));
    }

    #[test]
    fn error_kinds_are_distinct() {
        assert!(matches!(config_err("m = 3\n"), ConfigError::Syntax { line: 1, .. }));
        assert!(matches!(config_err("[environment\n"), ConfigError::Syntax { .. }));
        assert!(matches!(config_err("[environment]\nm 3\n"), ConfigError::Syntax { line: 2, .. }));
        assert!(matches!(config_err("[environment]\nm = three\n"), ConfigError::Syntax { .. }));
        assert!(matches!(config_err("[weather]\n"), ConfigError::Syntax { .. }));
        assert!(matches!(
            config_err("[agent.a]\nagent = split_q\nalpha = 1.5\n"),
            ConfigError::OutOfRange { line: 3, .. }
        ));
        assert!(matches!(
            config_err("[agent.a]\nagent = split_q\ngamma = 1\n"),
            ConfigError::OutOfRange { .. }
        ));
        assert!(matches!(config_err("[environment]\nn = 1\n"), ConfigError::OutOfRange { .. }));
        assert!(matches!(config_err("[agent.a]\nagent = sarsa\n"), ConfigError::Syntax { .. }));
        assert!(matches!(config_err("[agent.a]\nalpha = 0.2\n"), ConfigError::Invalid(_)));
        assert!(matches!(config_err("[environment]\nm = 2\n"), ConfigError::Invalid(_)));
        assert!(matches!(
            config_err("[agent.a]\nagent = split_q\n[agent.a]\nagent = q_learning\n"),
            ConfigError::Invalid(_)
        ));
    }

    #[test]
    fn missing_file_names_the_path() {
        let err = parse_config("/nonexistent/dir/missing.cfg").unwrap_err();
        assert!(matches!(err, Error::Config(ConfigError::MissingFile { .. })));
        assert!(err.to_string().contains("missing.cfg"));
    }

    #[test]
    fn unnamed_agent_section_takes_kind_name() {
        let cfg = parse_config_str("[agent]\nagent = q_learning\n").unwrap();
        assert_eq!(cfg.agents[0].name, "q_learning");
    }

    #[test]
    fn digest_tracks_content() {
        let a = parse_config_str("[agent.a]\nagent = split_q\n").unwrap();
        let mut b = a.clone();
        b.master_seed = 1;
        assert_eq!(a.digest(), a.clone().digest());
        assert_ne!(a.digest(), b.digest());
        assert_eq!(a.digest().len(), 16);
    }
}
