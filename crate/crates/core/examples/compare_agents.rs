//! Run all three learners on fresh layered environments, then write the
//! reward curves as CSV and SVG into a temporary directory.
//!
//! ```bash
//! cargo run --release --example compare_agents -- 200
//! ```
//! The optional argument is the trial count (default 100).

use splitq::agents::{AgentConfig, AgentKind};
use splitq::config::render_config;
use splitq::harness::{run_experiment, AgentSpec, ExperimentConfig};
use splitq::layered::LayeredConfig;
use splitq::posterior::SamplerMode;
use splitq::report::{quantize, write_csv, write_svg, PlotOptions};

fn main() -> splitq::Result<()> {
    let trials = std::env::args()
        .nth(1)
        .map(|a| a.parse().expect("trial count is an integer"))
        .unwrap_or(100);
    let base = AgentConfig {
        epsilon_off_step: Some(10_000),
        sampler: SamplerMode::ExactDirichlet,
        ..AgentConfig::default()
    };
    let cfg = ExperimentConfig {
        env: LayeredConfig {
            m: 5,
            n: 4,
            k: 2,
            ..LayeredConfig::default()
        },
        agents: vec![
            AgentSpec::new("q_learning", AgentKind::QLearning, base.clone()),
            AgentSpec::new("split_q", AgentKind::SplitQ, base.clone()),
            AgentSpec::new("uncertain", AgentKind::UncertainSplitQ, base),
        ],
        steps: 20_000,
        trials,
        master_seed: 42,
        smoothing_window: 100,
        output_path: std::env::temp_dir().join("splitq-compare").display().to_string(),
    };
    cfg.validate()?;

    let report = run_experiment(&cfg, 0)?;
    for c in &report.curves {
        let window = |lo: usize, hi: usize| c.mean[lo..hi].iter().sum::<f64>() / (hi - lo) as f64;
        println!(
            "{:<11} steps 0-10000: {:.4}   steps 15000-20000: {:.4}",
            c.agent,
            window(0, 10_000),
            window(15_000, 20_000)
        );
    }
    print!("{}", report.diagnostics.render());

    let dir = std::path::PathBuf::from(&cfg.output_path);
    std::fs::create_dir_all(&dir).map_err(|e| splitq::Error::Io { path: dir.clone(), source: e })?;
    write_csv(&report.curves, dir.join("rewards.csv"))?;
    write_svg(&quantize(&report.curves), &PlotOptions::from_config(&cfg), dir.join("rewards.svg"))?;
    std::fs::write(dir.join("resolved.cfg"), render_config(&cfg))
        .map_err(|e| splitq::Error::Io { path: dir.join("resolved.cfg"), source: e })?;
    println!("wrote {}", dir.display());
    Ok(())
}
