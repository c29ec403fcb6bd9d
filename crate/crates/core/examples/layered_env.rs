//! Generate a layered environment, inspect it and write it as mdp-v1 text.
//!
//! ```bash
//! cargo run --example layered_env -- 3 4 2 7 > env.mdp
//! ```
//! Arguments are `m n k seed` (defaults `5 4 2 1`).

use splitq::layered::{generate, LayeredConfig};
use splitq::mdp::{write_mdp, ActionId, StateId};

fn main() -> splitq::Result<()> {
    let args: Vec<u64> = std::env::args()
        .skip(1)
        .map(|a| a.parse().expect("arguments are non-negative integers"))
        .collect();
    let arg = |i: usize, default: u64| args.get(i).copied().unwrap_or(default);
    let cfg = LayeredConfig {
        m: arg(0, 5) as usize,
        n: arg(1, 4) as usize,
        k: arg(2, 2) as usize,
        seed: arg(3, 1),
        ..LayeredConfig::default()
    };
    let mdp = generate(&cfg)?;

    eprintln!(
        "{} states, digest {}; start state has {} actions",
        mdp.num_states(),
        mdp.digest(),
        mdp.num_actions(StateId(0))
    );
    let first = cfg.state(1, 0);
    for a in 0..mdp.num_actions(first) {
        for o in mdp.outcomes(first, ActionId(a))? {
            eprintln!(
                "  {first} a{a} -> {} (level {}) p={:.3} r={:.3}",
                o.next_state,
                cfg.level_of(o.next_state),
                o.probability,
                o.reward
            );
        }
    }
    print!("{}", write_mdp(&mdp));
    Ok(())
}
