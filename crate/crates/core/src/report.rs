//! Reward-curve CSV files and static SVG plots.
//!
//! The CSV header is `step,agent,mean_reward,stderr_reward`; reals carry 9
//! significant digits and lines end in LF. Rows are grouped by agent, steps
//! ascending. Plots are drawn from CSV-precision data so that re-rendering a
//! written CSV reproduces the original SVG byte for byte.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::harness::{ExperimentConfig, RewardCurve};

pub const CSV_HEADER: &str = "step,agent,mean_reward,stderr_reward";

fn fmt_real(x: f64) -> String {
    format!("{x:.8e}")
}

/// CSV text for `curves`.
pub fn format_csv(curves: &[RewardCurve]) -> String {
    let rows: usize = curves.iter().map(RewardCurve::len).sum();
    let mut out = String::with_capacity(48 * (rows + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for c in curves {
        for i in 0..c.len() {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                c.steps[i],
                c.agent,
                fmt_real(c.mean[i]),
                fmt_real(c.stderr[i])
            );
        }
    }
    out
}

pub fn write_csv(curves: &[RewardCurve], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, format_csv(curves)).map_err(|e| Error::io(path, e))
}

/// Parses CSV text back into curves, one per agent in order of first
/// appearance. The config digest is not stored and comes back empty.
pub fn parse_csv(text: &str) -> Result<Vec<RewardCurve>> {
    let mut lines = text.split('\n').enumerate();
    match lines.next() {
        Some((_, h)) if h == CSV_HEADER => {}
        Some((_, h)) => {
            return Err(Error::Csv {
                line: 1,
                message: format!("expected header `{CSV_HEADER}`, got `{h}`"),
            })
        }
        None => unreachable!("split yields at least one item"),
    }
    let mut curves: Vec<RewardCurve> = Vec::new();
    for (i, row) in lines {
        let line = i + 1;
        if row.is_empty() {
            continue;
        }
        let bad = |message: String| Error::Csv { line, message };
        let fields: Vec<&str> = row.split(',').collect();
        let [step, agent, mean, stderr] = fields[..] else {
            return Err(bad(format!("expected 4 fields, got {}", fields.len())));
        };
        let step: u64 = step.parse().map_err(|_| bad(format!("bad step `{step}`")))?;
        let real = |s: &str| -> Result<f64> {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| bad(format!("bad number `{s}`")))
        };
        let (mean, stderr) = (real(mean)?, real(stderr)?);
        let idx = match curves.iter().position(|c| c.agent == agent) {
            Some(idx) => idx,
            None => {
                curves.push(RewardCurve {
                    agent: agent.to_string(),
                    steps: Vec::new(),
                    mean: Vec::new(),
                    stderr: Vec::new(),
                    config_digest: String::new(),
                });
                curves.len() - 1
            }
        };
        let c = &mut curves[idx];
        if c.steps.last().is_some_and(|&last| step <= last) {
            return Err(bad(format!("step {step} out of order for agent `{agent}`")));
        }
        c.steps.push(step);
        c.mean.push(mean);
        c.stderr.push(stderr);
    }
    Ok(curves)
}

pub fn read_csv(path: impl AsRef<Path>) -> Result<Vec<RewardCurve>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_csv(&text)
}

/// `curves` rounded to the precision the CSV stores.
pub fn quantize(curves: &[RewardCurve]) -> Vec<RewardCurve> {
    let q = |xs: &[f64]| -> Vec<f64> {
        xs.iter()
            .map(|&x| fmt_real(x).parse().expect("formatted reals parse"))
            .collect()
    };
    curves
        .iter()
        .map(|c| RewardCurve {
            mean: q(&c.mean),
            stderr: q(&c.stderr),
            ..c.clone()
        })
        .collect()
}

/// Plot settings that are not part of the curve data.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotOptions {
    pub smoothing_window: usize,
    /// `(agent, step)` pairs drawn as dashed vertical lines.
    pub markers: Vec<(String, u64)>,
}

impl Default for PlotOptions {
    fn default() -> Self {
        Self {
            smoothing_window: crate::config::DEFAULT_SMOOTHING_WINDOW,
            markers: Vec::new(),
        }
    }
}

impl PlotOptions {
    /// Smoothing window and exploration switch-off steps of `cfg`.
    pub fn from_config(cfg: &ExperimentConfig) -> Self {
        Self {
            smoothing_window: cfg.smoothing_window,
            markers: cfg
                .agents
                .iter()
                .filter_map(|a| a.config.epsilon_off_step.map(|t| (a.name.clone(), t)))
                .collect(),
        }
    }
}

const WIDTH: f64 = 820.0;
const HEIGHT: f64 = 500.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 180.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

fn nice_step(span: f64, target_ticks: f64) -> f64 {
    let raw = span / target_ticks;
    let mag = 10f64.powf(raw.log10().floor());
    let frac = raw / mag;
    let nice = if frac <= 1.0 {
        1.0
    } else if frac <= 2.0 {
        2.0
    } else if frac <= 5.0 {
        5.0
    } else {
        10.0
    };
    nice * mag
}

/// Vertical axis range and tick spacing: tick-aligned, containing every
/// plotted mean.
pub fn y_axis(curves: &[RewardCurve]) -> (f64, f64, f64) {
    let (mut lo, mut hi) = curves
        .iter()
        .flat_map(|c| c.mean.iter().copied())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() || !hi.is_finite() {
        (lo, hi) = (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        let pad = (hi.abs() * 0.05).max(0.5);
        (lo, hi) = (lo - pad, hi + pad);
    }
    let step = nice_step(hi - lo, 6.0);
    ((lo / step).floor() * step, (hi / step).ceil() * step, step)
}

fn tick_label(v: f64, step: f64) -> String {
    let decimals = (-step.log10().floor()).max(0.0) as usize;
    let s = format!("{v:.decimals$}");
    if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
        s[1..].to_string()
    } else {
        s
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// SVG plot of smoothed mean reward against step, one polyline per curve.
pub fn render_svg(curves: &[RewardCurve], opts: &PlotOptions) -> String {
    let smoothed: Vec<RewardCurve> = curves.iter().map(|c| c.smoothed(opts.smoothing_window)).collect();
    let x_max = curves
        .iter()
        .filter_map(|c| c.steps.last().copied())
        .max()
        .unwrap_or(0)
        .max(1) as f64;
    let (y_lo, y_hi, y_step) = y_axis(&smoothed);
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let px = |x: f64| LEFT + x / x_max * plot_w;
    let py = |y: f64| TOP + (y_hi - y) / (y_hi - y_lo) * plot_h;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<g id="axes" data-y-min="{y_lo}" data-y-max="{y_hi}" data-x-max="{x_max}" stroke="black" fill="none">"#
    );
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}"/>"#
    );
    s.push_str("</g>\n<g id=\"ticks\" fill=\"black\">\n");
    let n_y = ((y_hi - y_lo) / y_step).round() as i64;
    for i in 0..=n_y {
        let v = y_lo + i as f64 * y_step;
        let y = py(v);
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            LEFT - 5.0,
            LEFT - 8.0,
            y + 4.0,
            tick_label(v, y_step)
        );
    }
    let x_step = nice_step(x_max, 5.0);
    let n_x = (x_max / x_step).floor() as i64;
    for i in 0..=n_x {
        let v = i as f64 * x_step;
        let x = px(v);
        let _ = writeln!(
            s,
            r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            TOP + plot_h,
            TOP + plot_h + 5.0,
            TOP + plot_h + 20.0,
            tick_label(v, x_step)
        );
    }
    s.push_str("</g>\n");
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">step</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 15.0
    );
    let _ = writeln!(
        s,
        r#"<text x="20" y="{:.2}" text-anchor="middle" transform="rotate(-90 20 {:.2})">average reward</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0
    );

    let color = |name: &str| {
        let i = curves.iter().position(|c| c.agent == name).unwrap_or(0);
        PALETTE[i % PALETTE.len()]
    };
    for (agent, step) in &opts.markers {
        if (*step as f64) > x_max {
            continue;
        }
        let x = px(*step as f64);
        let _ = writeln!(
            s,
            r#"<line class="epsilon-off" data-agent="{}" x1="{x:.2}" y1="{TOP}" x2="{x:.2}" y2="{:.2}" stroke="{}" stroke-dasharray="6 4" stroke-opacity="0.7"/>"#,
            escape(agent),
            TOP + plot_h,
            color(agent)
        );
    }
    for c in &smoothed {
        let mut points = String::with_capacity(16 * c.len());
        for (i, (&step, &m)) in c.steps.iter().zip(&c.mean).enumerate() {
            if i > 0 {
                points.push(' ');
            }
            let _ = write!(points, "{:.2},{:.2}", px(step as f64), py(m));
        }
        let _ = writeln!(
            s,
            r#"<polyline data-agent="{}" fill="none" stroke="{}" stroke-width="1.5" points="{points}"/>"#,
            escape(&c.agent),
            color(&c.agent)
        );
    }
    s.push_str("<g id=\"legend\">\n");
    for (i, c) in curves.iter().enumerate() {
        let y = TOP + 10.0 + 20.0 * i as f64;
        let x = WIDTH - RIGHT + 15.0;
        let _ = writeln!(
            s,
            r#"<line x1="{x:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{}" stroke-width="3"/><text x="{:.2}" y="{:.2}">{}</text>"#,
            x + 25.0,
            color(&c.agent),
            x + 32.0,
            y + 4.0,
            escape(&c.agent)
        );
    }
    s.push_str("</g>\n</svg>\n");
    s
}

pub fn write_svg(curves: &[RewardCurve], opts: &PlotOptions, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, render_svg(curves, opts)).map_err(|e| Error::io(path, e))
}
