//! Draw transition-probability vectors from their posterior with the
//! acceptance-rejection sampler and the exact Dirichlet sampler.

use splitq::posterior::{joint_likelihood, sample_simplex, unknown_mass_mean, OutcomeCounts, SamplerMode, SamplerStats};
use splitq::rng::RandomSource;

fn main() -> splitq::Result<()> {
    let mut rng = RandomSource::from_seed(3);
    let draws = 20_000;
    for observed in [vec![0, 0], vec![3, 7], vec![9, 1], vec![50, 50]] {
        let counts = OutcomeCounts::with_unknown(&observed);
        println!(
            "counts {observed:?} + unknown slot (expected unknown mass {:.4})",
            unknown_mass_mean(counts.total())
        );
        for mode in [SamplerMode::PaperRejection, SamplerMode::ExactDirichlet] {
            let mut stats = SamplerStats::default();
            let mut mean = vec![0.0; counts.len()];
            for _ in 0..draws {
                let s = sample_simplex(&counts, mode, &mut rng);
                stats.record(s.proposals, s.fallback);
                for (m, p) in mean.iter_mut().zip(s.vector.components()) {
                    *m += p / draws as f64;
                }
            }
            let shown: Vec<String> = mean.iter().map(|m| format!("{m:.4}")).collect();
            println!(
                "  {mode:<16} mean ({}) proposals/draw {:.1} fallbacks {}",
                shown.join(", "),
                stats.proposals as f64 / stats.draws as f64,
                stats.fallbacks
            );
        }
        let last = sample_simplex(&counts, SamplerMode::ExactDirichlet, &mut rng).vector;
        println!("  likelihood of one exact draw relative to the MLE: {:.4}", joint_likelihood(&last, &counts)?);
    }
    Ok(())
}
