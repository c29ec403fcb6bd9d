//! The `splitq` command line: `gen-env`, `run` and `plot`.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::config::{parse_config, render_config};
use crate::error::{Error, Result};
use crate::harness::run_experiment;
use crate::layered::generate;
use crate::mdp::write_mdp;
use crate::report::{format_csv, parse_csv, quantize, render_svg, PlotOptions};

pub const CSV_FILE: &str = "rewards.csv";
pub const SVG_FILE: &str = "rewards.svg";
pub const RESOLVED_CONFIG_FILE: &str = "resolved.cfg";
pub const DIAGNOSTICS_FILE: &str = "diagnostics.txt";

#[derive(Debug, Parser)]
#[command(name = "splitq", version, about = "Tabular split-Q-learning experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate the configured layered environment as an mdp-v1 file.
    GenEnv {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the configured experiment and write CSV, SVG, resolved config and diagnostics.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (defaults to the config's output_path).
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Worker threads (0 = all cores).
        #[arg(long, default_value_t = 0)]
        workers: usize,
    },
    /// Re-render the SVG plot from a CSV written by `run`.
    Plot {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn gen_env(config: &Path, out: &Path, stdout: &mut dyn Write) -> Result<()> {
    let cfg = parse_config(config)?;
    let mdp = generate(&cfg.env)?;
    write_file(out, &write_mdp(&mdp))?;
    let _ = writeln!(
        stdout,
        "wrote {} ({} states, digest {})",
        out.display(),
        mdp.num_states(),
        mdp.digest()
    );
    Ok(())
}

fn run(config: &Path, out_dir: Option<&Path>, workers: usize, stdout: &mut dyn Write) -> Result<()> {
    let cfg = parse_config(config)?;
    let dir = out_dir.map_or_else(|| PathBuf::from(&cfg.output_path), Path::to_path_buf);
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let report = run_experiment(&cfg, workers)?;

    let csv = format_csv(&report.curves);
    let svg = render_svg(&quantize(&report.curves), &PlotOptions::from_config(&cfg));
    write_file(&dir.join(RESOLVED_CONFIG_FILE), &render_config(&cfg))?;
    write_file(&dir.join(CSV_FILE), &csv)?;
    write_file(&dir.join(SVG_FILE), &svg)?;
    write_file(&dir.join(DIAGNOSTICS_FILE), &report.diagnostics.render())?;
    let _ = writeln!(
        stdout,
        "{} trials x {} steps, {} agents -> {}",
        cfg.trials,
        cfg.steps,
        cfg.agents.len(),
        dir.display()
    );
    Ok(())
}

fn plot(csv: &Path, out: &Path) -> Result<()> {
    let text = std::fs::read_to_string(csv).map_err(|e| Error::io(csv, e))?;
    let curves = parse_csv(&text)?;
    let resolved = csv.with_file_name(RESOLVED_CONFIG_FILE);
    let opts = if resolved.exists() {
        PlotOptions::from_config(&parse_config(&resolved)?)
    } else {
        PlotOptions::default()
    };
    write_file(out, &render_svg(&curves, &opts))
}

/// Runs the command line `args` (program name first) and returns the exit
/// code: 0 on success, 1 on a failed command, 2 on a usage error.
pub fn cli_main<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(stderr, "{text}");
                2
            } else {
                let _ = write!(stdout, "{text}");
                0
            };
        }
    };
    let result = match &cli.command {
        Command::GenEnv { config, out } => gen_env(config, out, stdout),
        Command::Run {
            config,
            out_dir,
            workers,
        } => run(config, out_dir.as_deref(), *workers, stdout),
        Command::Plot { csv, out } => plot(csv, out),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {}", e.to_string().replace('\n', " "));
            1
        }
    }
}
