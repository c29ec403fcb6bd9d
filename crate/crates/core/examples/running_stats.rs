//! Cumulative and exponentially weighted mean/variance of a drifting stream.

use rand_distr::{Distribution, Normal};
use splitq::rng::RandomSource;
use splitq::running_stats::MeanVarAccumulator;

fn main() -> splitq::Result<()> {
    let mut rng = RandomSource::from_seed(7);
    let noise = Normal::new(0.0, 0.5).expect("valid sd");
    let mut cumulative = MeanVarAccumulator::cumulative();
    let mut recent = MeanVarAccumulator::ewma(0.1)?;

    // The level drops from 10 to 6 halfway through, as an optimistic
    // estimate would while it is being learned.
    for t in 0..2_000 {
        let level = if t < 1_000 { 10.0 } else { 6.0 };
        let x = level + noise.sample(&mut rng);
        cumulative.push(x)?;
        recent.push(x)?;
        if (t + 1) % 250 == 0 {
            println!(
                "t={:>4}  cumulative mean {:6.3} sd {:5.3} | ewma mean {:6.3} sd {:5.3}",
                t + 1,
                cumulative.mean(),
                cumulative.variance().sqrt(),
                recent.mean(),
                recent.variance().sqrt()
            );
        }
    }
    println!("sample variance (n - 1): {:.4}", cumulative.sample_variance());
    println!("prior sd used below two samples: {}", MeanVarAccumulator::cumulative().std_dev(5.0));
    Ok(())
}
