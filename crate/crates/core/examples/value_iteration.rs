//! Solve a layered environment exactly and check the Bellman fixed point.

use splitq::layered::{generate, LayeredConfig};
use splitq::mdp::{bellman_residual, value_iteration, DiscountFactor, StateId};

fn main() -> splitq::Result<()> {
    let cfg = LayeredConfig {
        m: 5,
        n: 4,
        k: 2,
        ..LayeredConfig::default()
    };
    let mdp = generate(&cfg)?;
    let gamma = DiscountFactor::new(0.9)?;
    let q = value_iteration(&mdp, gamma, 1e-10)?;

    println!("residual after solve: {:.2e}", bellman_residual(&mdp, gamma, &q));
    println!("V*(start) = {:.4}", q.max_value(StateId(0)));
    for level in 1..=cfg.m {
        let values: Vec<String> = (0..cfg.n)
            .map(|j| format!("{:.3}", q.max_value(cfg.state(level, j))))
            .collect();
        println!("level {level}: {}", values.join(" "));
    }

    // A greedy walk through one cycle of the optimal policy.
    let mut s = StateId(0);
    let mut path = vec![s.to_string()];
    for _ in 0..=cfg.m {
        let a = q.greedy_action(s);
        let best = mdp
            .outcomes(s, a)?
            .iter()
            .max_by(|x, y| x.probability.total_cmp(&y.probability))
            .expect("every action has outcomes");
        s = best.next_state;
        path.push(format!("{a}->{s}"));
    }
    println!("most likely greedy cycle: {}", path.join(" "));
    Ok(())
}
