//! Posterior-sampled action choice. An untried action is preferred
//! outright; as experience accumulates the sampled values tighten and the
//! choice concentrates on the best action.

use splitq::agents::{AgentConfig, SplitQTable, UncertainSelector};
use splitq::mdp::{ActionId, ActionLayout, DiscountFactor, StateId};
use splitq::posterior::SamplerMode;
use splitq::rng::RandomSource;

fn frequencies(table: &SplitQTable, cfg: &AgentConfig) -> splitq::Result<String> {
    let rounds = 10_000;
    let mut rng = RandomSource::from_seed(2);
    let mut selector = UncertainSelector::new();
    let mut counts = [0usize; 3];
    for _ in 0..rounds {
        counts[selector.select(table, StateId(0), cfg, &mut rng)?.0] += 1;
    }
    let shown: Vec<String> = counts.iter().map(|&c| format!("{:.3}", c as f64 / rounds as f64)).collect();
    Ok(shown.join(" "))
}

fn main() -> splitq::Result<()> {
    // With gamma = 0 each action's value is just its reward: 0.8, 0.7, 0.2.
    let cfg = AgentConfig {
        gamma: DiscountFactor::new(0.0)?,
        sampler: SamplerMode::ExactDirichlet,
        ..AgentConfig::default()
    };
    let rewards = [0.8, 0.7, 0.2];
    let mut table = SplitQTable::new(ActionLayout::new(&[3, 1, 1, 1]), cfg.accumulator_mode())?;
    let s0 = StateId(0);

    println!("updates per action    selection frequency of actions 0 1 2");
    let mut updates = [0usize; 3];
    for target in [0, 1, 3, 10, 30, 100, 300] {
        for a in 0..3 {
            // Action 2 stays untried in the first row.
            let goal = if target == 0 && a < 2 { 1 } else { target };
            while updates[a] < goal {
                table.split_q_update(s0, ActionId(a), rewards[a], StateId(a + 1), &cfg)?;
                updates[a] += 1;
            }
        }
        println!("{:<22}{}", format!("{updates:?}"), frequencies(&table, &cfg)?);
    }
    Ok(())
}
