//! `mdp-v1` text serialization.
//!
//! ```text
//! schema = mdp-v1
//! num_states = 3
//! actions = 1 2 1
//! # state action next_state probability reward
//! 0 0 1 1.0000000000000000e0 5.0000000000000000e-1
//! ...
//! ```
//!
//! Outcome lines are grouped by `(state, action)` in ascending order, in the
//! order the outcomes are stored. Reals carry 17 significant digits, which
//! round-trips every finite `f64` exactly.

use std::fmt::Write as _;

use super::{Outcome, TabularMdp};
use crate::error::{Error, Result};

pub const MDP_SCHEMA: &str = "mdp-v1";

pub fn write_mdp(mdp: &TabularMdp) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "schema = {MDP_SCHEMA}");
    let _ = writeln!(out, "num_states = {}", mdp.num_states());
    let counts: Vec<String> = mdp.actions_per_state().iter().map(usize::to_string).collect();
    let _ = writeln!(out, "actions = {}", counts.join(" "));
    out.push_str("# state action next_state probability reward\n");
    for (s, actions) in mdp.transitions().iter().enumerate() {
        for (a, outcomes) in actions.iter().enumerate() {
            for o in outcomes {
                let _ = writeln!(
                    out,
                    "{s} {a} {} {:.16e} {:.16e}",
                    o.next_state.0, o.probability, o.reward
                );
            }
        }
    }
    out
}

fn format_err(line: usize, message: impl Into<String>) -> Error {
    Error::MdpFormat {
        line,
        message: message.into(),
    }
}

fn header<'a>(lines: &mut impl Iterator<Item = (usize, &'a str)>, key: &str) -> Result<(usize, &'a str)> {
    let (no, line) = lines
        .next()
        .ok_or_else(|| format_err(0, format!("missing `{key}` header")))?;
    let (k, v) = line
        .split_once('=')
        .ok_or_else(|| format_err(no, format!("expected `{key} = ...`")))?;
    if k.trim() != key {
        return Err(format_err(no, format!("expected `{key}`, found `{}`", k.trim())));
    }
    Ok((no, v.trim()))
}

/// Parses an `mdp-v1` document. Structure is checked here; probability
/// and reward invariants are left to [`TabularMdp::validate`].
pub fn read_mdp(text: &str) -> Result<TabularMdp> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (no, schema) = header(&mut lines, "schema")?;
    if schema != MDP_SCHEMA {
        return Err(format_err(no, format!("unsupported schema `{schema}`")));
    }
    let (no, n) = header(&mut lines, "num_states")?;
    let num_states: usize = n
        .parse()
        .map_err(|_| format_err(no, format!("bad num_states `{n}`")))?;
    let (no, acts) = header(&mut lines, "actions")?;
    let actions: Vec<usize> = acts
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| format_err(no, format!("bad action count `{t}`"))))
        .collect::<Result<_>>()?;
    if actions.len() != num_states {
        return Err(format_err(
            no,
            format!("{} action counts for {num_states} states", actions.len()),
        ));
    }

    let mut transitions: Vec<Vec<Vec<Outcome>>> =
        actions.iter().map(|&k| vec![Vec::new(); k]).collect();
    let mut last = (0usize, 0usize);
    for (no, line) in lines {
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 5 {
            return Err(format_err(no, format!("expected 5 fields, found {}", fields.len())));
        }
        let idx = |i: usize| -> Result<usize> {
            fields[i]
                .parse()
                .map_err(|_| format_err(no, format!("bad index `{}`", fields[i])))
        };
        let real = |i: usize| -> Result<f64> {
            fields[i]
                .parse()
                .map_err(|_| format_err(no, format!("bad real `{}`", fields[i])))
        };
        let (s, a, next) = (idx(0)?, idx(1)?, idx(2)?);
        if s >= num_states || a >= actions[s] {
            return Err(format_err(no, format!("(s{s}, a{a}) not declared")));
        }
        if (s, a) < last {
            return Err(format_err(no, "outcome lines out of (state, action) order"));
        }
        last = (s, a);
        transitions[s][a].push(Outcome::new(next, real(3)?, real(4)?));
    }
    Ok(TabularMdp::new(transitions))
}
