use std::path::Path;
use std::process::{Command, Output};

use splitq::mdp::read_mdp;

const SMALL: &str = "\
[environment]
m = 3
n = 3
k = 2
seed = 9

[agent.q]
agent = q_learning
epsilon_off_step = 300

[agent.split]
agent = split_q
epsilon_off_step = 300

[agent.uncertain]
agent = uncertain_split_q
sampler = exact_dirichlet

[experiment]
steps = 600
trials = 12
master_seed = 5
smoothing_window = 20
";

fn splitq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_splitq"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path) -> String {
    let path = dir.join("small.cfg");
    std::fs::write(&path, SMALL).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn run_writes_all_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path());
    let out = dir.path().join("out");
    let res = splitq(&["run", "--config", &cfg, "--out-dir", out.to_str().unwrap()]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    for f in ["rewards.csv", "rewards.svg", "resolved.cfg", "diagnostics.txt"] {
        assert!(out.join(f).exists(), "{f} missing");
    }
    let csv = std::fs::read_to_string(out.join("rewards.csv")).unwrap();
    assert!(csv.starts_with("step,agent,mean_reward,stderr_reward\n"));
    assert_eq!(csv.lines().count(), 1 + 3 * 600);
    let diag = std::fs::read_to_string(out.join("diagnostics.txt")).unwrap();
    assert!(diag.contains("sampler_fallbacks"));
}

#[test]
fn plot_reproduces_run_svg() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path());
    let out = dir.path().join("out");
    assert!(splitq(&["run", "--config", &cfg, "--out-dir", out.to_str().unwrap()]).status.success());
    let replot = dir.path().join("replot.svg");
    let res = splitq(&[
        "plot",
        "--csv",
        out.join("rewards.csv").to_str().unwrap(),
        "--out",
        replot.to_str().unwrap(),
    ]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    assert_eq!(
        std::fs::read(out.join("rewards.svg")).unwrap(),
        std::fs::read(replot).unwrap()
    );
}

#[test]
fn resolved_config_reruns_identically() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path());
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert!(splitq(&["run", "--config", &cfg, "--out-dir", a.to_str().unwrap()]).status.success());
    let resolved = a.join("resolved.cfg");
    assert!(splitq(&["run", "--config", resolved.to_str().unwrap(), "--out-dir", b.to_str().unwrap()])
        .status
        .success());
    for f in ["rewards.csv", "rewards.svg", "resolved.cfg", "diagnostics.txt"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn gen_env_writes_parseable_mdp() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path());
    let path = dir.path().join("env.mdp");
    let res = splitq(&["gen-env", "--config", &cfg, "--out", path.to_str().unwrap()]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let mdp = read_mdp(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(mdp.num_states(), 10);
    assert!(mdp.validate().is_valid());
}

#[test]
fn missing_config_names_the_path() {
    let res = splitq(&["run", "--config", "missing.cfg", "--out-dir", "unused"]);
    assert_eq!(res.status.code(), Some(1));
    let err = String::from_utf8_lossy(&res.stderr);
    assert!(err.contains("missing.cfg"), "{err}");
    assert_eq!(err.trim_end().lines().count(), 1);
}

#[test]
fn usage_errors_exit_two() {
    for args in [&["frobnicate"][..], &["run", "--bogus"][..], &[][..]] {
        let res = splitq(args);
        assert_eq!(res.status.code(), Some(2), "{args:?}");
        assert!(!res.stderr.is_empty());
    }
}

#[test]
fn bad_config_value_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.cfg");
    std::fs::write(&path, "[agent.a]\nagent = split_q\nalpha = 2\n").unwrap();
    let res = splitq(&["run", "--config", path.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&res.stderr).contains("line 3"));
}

#[test]
fn in_process_entry_point() {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = splitq::cli::cli_main(["splitq", "--help"], &mut out, &mut err);
    assert_eq!(code, 0);
    let help = String::from_utf8(out).unwrap();
    for cmd in ["gen-env", "run", "plot"] {
        assert!(help.contains(cmd));
    }
}
