//! Start both learners at the true values of a state with two random
//! successors and keep updating. The ordinary estimate keeps jittering with
//! a spread that grows with the learning rate; each split entry stays put.

use splitq::agents::{AgentConfig, QTable, SplitQTable};
use splitq::mdp::{value_iteration, ActionId, DiscountFactor, Outcome, StateId, TabularMdp};
use splitq::rng::RandomSource;
use splitq::running_stats::MeanVarAccumulator;

fn main() -> splitq::Result<()> {
    let env = TabularMdp::try_new(vec![
        vec![vec![Outcome::new(1, 0.5, 1.0), Outcome::new(2, 0.5, 0.0)]],
        vec![vec![Outcome::new(0, 1.0, 0.0)]],
        vec![vec![Outcome::new(0, 1.0, 0.0)]],
    ])?;
    let gamma = DiscountFactor::new(0.9)?;
    let q_star = value_iteration(&env, gamma, 1e-12)?;
    let (s0, a0) = (StateId(0), ActionId(0));
    println!("Q*(s0) = {:.4}", q_star.get(s0, a0));

    for alpha in [0.02, 0.05, 0.1, 0.2] {
        let cfg = AgentConfig {
            alpha,
            gamma,
            ewma_beta: alpha,
            unknown_enabled: false,
            ..AgentConfig::default()
        };
        let mut plain = QTable::new(env.layout(), 0.0);
        let mut split = SplitQTable::new(env.layout(), cfg.accumulator_mode())?;
        for s in 0..env.num_states() {
            let s = StateId(s);
            plain.set(s, a0, q_star.get(s, a0))?;
            for o in env.outcomes(s, a0)? {
                let v = o.reward + gamma.get() * q_star.get(o.next_state, a0);
                split.insert_entry(s, a0, o.next_state, v, 1)?;
            }
        }

        let mut rng = RandomSource::from_seed(1);
        let mut spread = MeanVarAccumulator::cumulative();
        let mut s = s0;
        for _ in 0..100_000 {
            let (next, r) = env.sample_transition(s, a0, &mut rng)?;
            plain.q_update(s, a0, r, next, &cfg)?;
            split.split_q_update(s, a0, r, next, &cfg)?;
            if s == s0 {
                spread.push(plain.q(s0, a0)?)?;
            }
            s = next;
        }
        let split_sd = split
            .entries(s0, a0)?
            .iter()
            .map(|e| e.accumulator().variance().sqrt())
            .fold(0.0, f64::max);
        println!(
            "alpha {alpha:<4}  sd of Q(s0): {:.4}   largest split entry sd: {split_sd:.2e}",
            spread.variance().sqrt()
        );
    }
    Ok(())
}
