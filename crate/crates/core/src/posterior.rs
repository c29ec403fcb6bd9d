//! Posterior over an action's outcome probabilities given observed counts.
//!
//! Under a uniform prior the posterior density of `p` given counts `n_i` is
//! proportional to `Π p_i^{n_i}` on the simplex. Two samplers are offered:
//!
//! * [`SamplerMode::PaperRejection`]: propose each component uniformly from
//!   `[0, 1]`, normalize, accept when a fresh uniform falls below the
//!   likelihood (scaled so its maximum is 1). The normalized-uniform proposal
//!   is not uniform on the simplex, so this sampler is biased relative to the
//!   exact posterior; it is kept as written and compared against the exact
//!   sampler in tests.
//! * [`SamplerMode::ExactDirichlet`]: `Dirichlet(n_i + 1)` via normalized
//!   unit-scale gamma draws.
//!
//! Counts may carry a trailing "unknown outcome" slot with count 0 that
//! stands for a successor never observed yet.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Gamma};

use crate::error::{Error, Result};

/// Proposals tried by the rejection sampler before falling back.
pub const REJECTION_RETRY_CAP: u32 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SamplerMode {
    #[default]
    PaperRejection,
    ExactDirichlet,
}

impl fmt::Display for SamplerMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SamplerMode::PaperRejection => "paper_rejection",
            SamplerMode::ExactDirichlet => "exact_dirichlet",
        })
    }
}

impl FromStr for SamplerMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "paper_rejection" => Ok(SamplerMode::PaperRejection),
            "exact_dirichlet" => Ok(SamplerMode::ExactDirichlet),
            other => Err(format!(
                "unknown sampler `{other}` (expected paper_rejection or exact_dirichlet)"
            )),
        }
    }
}

/// Observed outcome tallies for one `(s, a)`, optionally followed by the
/// unknown-outcome slot (always count 0).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutcomeCounts {
    slots: Vec<u64>,
    has_unknown: bool,
}

impl OutcomeCounts {
    /// Observed counts followed by an unknown slot.
    pub fn with_unknown(observed: &[u64]) -> Self {
        let mut slots = observed.to_vec();
        slots.push(0);
        Self {
            slots,
            has_unknown: true,
        }
    }

    /// Observed counts only. At least one slot is required.
    pub fn observed_only(observed: &[u64]) -> Result<Self> {
        if observed.is_empty() {
            return Err(Error::invalid("outcome counts need at least one slot"));
        }
        Ok(Self {
            slots: observed.to_vec(),
            has_unknown: false,
        })
    }

    pub fn slots(&self) -> &[u64] {
        &self.slots
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn has_unknown(&self) -> bool {
        self.has_unknown
    }

    pub fn total(&self) -> u64 {
        self.slots.iter().sum()
    }
}

/// A point on the probability simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityVector(Vec<f64>);

impl ProbabilityVector {
    /// Components must lie in `[0, 1]` and sum to 1 within `1e-12`.
    pub fn new(components: Vec<f64>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::invalid("empty probability vector"));
        }
        if components.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::invalid(format!("component outside [0, 1]: {components:?}")));
        }
        let sum: f64 = components.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!("components sum to {sum}")));
        }
        Ok(Self(components))
    }

    pub fn components(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

/// `Π p_i^{n_i}` divided by its maximum over the simplex (attained at
/// `p_i = n_i / n`), so the result lies in `[0, 1]`. `0^0 = 1`.
pub fn joint_likelihood(p: &ProbabilityVector, c: &OutcomeCounts) -> Result<f64> {
    if p.0.len() != c.slots.len() {
        return Err(Error::invalid(format!(
            "probability vector has {} components, counts have {}",
            p.0.len(),
            c.slots.len()
        )));
    }
    Ok(scaled_likelihood(&p.0, &c.slots))
}

fn log_max_likelihood(counts: &[u64]) -> f64 {
    let n: u64 = counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    let ln_n = (n as f64).ln();
    counts
        .iter()
        .filter(|&&k| k > 0)
        .map(|&k| k as f64 * ((k as f64).ln() - ln_n))
        .sum()
}

fn scaled_likelihood(p: &[f64], counts: &[u64]) -> f64 {
    let mut log_l = 0.0;
    for (&pi, &k) in p.iter().zip(counts) {
        if k == 0 {
            continue;
        }
        if pi <= 0.0 {
            return 0.0;
        }
        log_l += k as f64 * pi.ln();
    }
    (log_l - log_max_likelihood(counts)).min(0.0).exp()
}

/// Mean of the density `∝ (1 - p)^n` on `[0, 1]`: `1 / (n + 2)`.
#[inline]
pub fn unknown_mass_mean(n: u64) -> f64 {
    1.0 / (n as f64 + 2.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexSample {
    pub vector: ProbabilityVector,
    /// Proposals consumed (always 1 for the exact sampler).
    pub proposals: u32,
    /// True when the rejection sampler hit its retry cap.
    pub fallback: bool,
}

/// Tallies of sampler work, aggregated into experiment diagnostics.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SamplerStats {
    pub draws: u64,
    pub proposals: u64,
    pub fallbacks: u64,
}

impl SamplerStats {
    pub fn record(&mut self, proposals: u32, fallback: bool) {
        self.draws += 1;
        self.proposals += proposals as u64;
        self.fallbacks += fallback as u64;
    }

    pub fn merge(&mut self, other: &SamplerStats) {
        self.draws += other.draws;
        self.proposals += other.proposals;
        self.fallbacks += other.fallbacks;
    }
}

/// Draws one probability vector from the posterior given `c`.
pub fn sample_simplex<R: Rng + ?Sized>(
    c: &OutcomeCounts,
    mode: SamplerMode,
    rng: &mut R,
) -> SimplexSample {
    let mut out = Vec::with_capacity(c.slots.len());
    let (proposals, fallback) = sample_into(&c.slots, c.has_unknown, mode, rng, &mut out);
    SimplexSample {
        vector: ProbabilityVector(out),
        proposals,
        fallback,
    }
}

/// Allocation-free core of [`sample_simplex`]: writes the draw into `out`
/// (cleared first) and returns `(proposals, fallback)`.
pub(crate) fn sample_into<R: Rng + ?Sized>(
    counts: &[u64],
    has_unknown: bool,
    mode: SamplerMode,
    rng: &mut R,
    out: &mut Vec<f64>,
) -> (u32, bool) {
    out.clear();
    match mode {
        SamplerMode::ExactDirichlet => {
            let mut sum = 0.0;
            for &k in counts {
                let g = Gamma::new(k as f64 + 1.0, 1.0).expect("shape >= 1").sample(rng);
                out.push(g);
                sum += g;
            }
            normalize(out, sum);
            (1, false)
        }
        SamplerMode::PaperRejection => {
            let log_max = log_max_likelihood(counts);
            out.resize(counts.len(), 0.0);
            for attempt in 1..=REJECTION_RETRY_CAP {
                let mut sum = 0.0;
                for slot in out.iter_mut() {
                    *slot = rng.random::<f64>();
                    sum += *slot;
                }
                if sum <= 0.0 {
                    continue;
                }
                normalize(out, sum);
                let mut log_l = -log_max;
                let mut impossible = false;
                for (&pi, &k) in out.iter().zip(counts) {
                    if k > 0 {
                        if pi <= 0.0 {
                            impossible = true;
                            break;
                        }
                        log_l += k as f64 * pi.ln();
                    }
                }
                let accept_prob = if impossible { 0.0 } else { log_l.min(0.0).exp() };
                if rng.random::<f64>() < accept_prob {
                    return (attempt, false);
                }
            }
            fallback_point(counts, has_unknown, out);
            (REJECTION_RETRY_CAP, true)
        }
    }
}

fn normalize(v: &mut [f64], sum: f64) {
    for x in v.iter_mut() {
        *x = (*x / sum).min(1.0);
    }
}

/// Posterior center: observed frequencies, shrunk to leave
/// `unknown_mass_mean(n)` on the unknown slot when present.
fn fallback_point(counts: &[u64], has_unknown: bool, out: &mut Vec<f64>) {
    let n: u64 = counts.iter().sum();
    out.clear();
    if n == 0 {
        let k = counts.len() as f64;
        out.extend(counts.iter().map(|_| 1.0 / k));
        return;
    }
    let unknown = if has_unknown { unknown_mass_mean(n) } else { 0.0 };
    let observed = if has_unknown { &counts[..counts.len() - 1] } else { counts };
    out.extend(observed.iter().map(|&k| (1.0 - unknown) * k as f64 / n as f64));
    if has_unknown {
        out.push(unknown);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RandomSource;
    use proptest::prelude::*;

    fn pv(v: &[f64]) -> ProbabilityVector {
        ProbabilityVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn likelihood_of_empty_counts_is_one() {
        let c = OutcomeCounts::with_unknown(&[0, 0]);
        assert_eq!(joint_likelihood(&pv(&[0.2, 0.3, 0.5]), &c).unwrap(), 1.0);
        assert_eq!(joint_likelihood(&pv(&[0.0, 0.0, 1.0]), &c).unwrap(), 1.0);
    }

    #[test]
    fn likelihood_is_one_at_mle() {
        let c = OutcomeCounts::observed_only(&[1, 1]).unwrap();
        assert!((joint_likelihood(&pv(&[0.5, 0.5]), &c).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn likelihood_hand_value() {
        // (0.5^2 * 0.4^0 * 0.1^0) / (1^2) = 0.25
        let c = OutcomeCounts::with_unknown(&[2, 0]);
        let l = joint_likelihood(&pv(&[0.5, 0.4, 0.1]), &c).unwrap();
        assert!((l - 0.25).abs() < 1e-15);
    }

    #[test]
    fn likelihood_length_mismatch() {
        let c = OutcomeCounts::with_unknown(&[2]);
        assert!(joint_likelihood(&pv(&[0.5, 0.4, 0.1]), &c).is_err());
    }

    #[test]
    fn likelihood_zero_where_observed_outcome_impossible() {
        let c = OutcomeCounts::observed_only(&[3, 1]).unwrap();
        assert_eq!(joint_likelihood(&pv(&[1.0, 0.0]), &c).unwrap(), 0.0);
    }

    #[test]
    fn unknown_mass_values() {
        assert_eq!(unknown_mass_mean(0), 0.5);
        assert!((unknown_mass_mean(1) - 1.0 / 3.0).abs() < 1e-15);
        for n in 0..1000 {
            assert!(unknown_mass_mean(n + 1) < unknown_mass_mean(n));
        }
    }

    #[test]
    fn unknown_mass_mean_matches_quadrature() {
        // Midpoint rule on ∫ p (1-p)^n dp / ∫ (1-p)^n dp.
        for n in [0u64, 1, 2, 5, 20] {
            let steps = 200_000;
            let h = 1.0 / steps as f64;
            let (mut num, mut den) = (0.0, 0.0);
            for i in 0..steps {
                let p = (i as f64 + 0.5) * h;
                let w = (1.0 - p).powi(n as i32);
                num += p * w * h;
                den += w * h;
            }
            assert!((num / den - unknown_mass_mean(n)).abs() < 1e-6);
        }
    }

    #[test]
    fn rejection_with_no_data_accepts_first_proposal() {
        let mut rng = RandomSource::from_seed(1);
        let c = OutcomeCounts::with_unknown(&[0, 0]);
        for _ in 0..1000 {
            let s = sample_simplex(&c, SamplerMode::PaperRejection, &mut rng);
            assert_eq!(s.proposals, 1);
            assert!(!s.fallback);
        }
    }

    #[test]
    fn dirichlet_means_match_closed_form() {
        let mut rng = RandomSource::from_seed(2);
        let c = OutcomeCounts::with_unknown(&[9, 1]);
        let alpha = [10.0, 2.0, 1.0];
        let a0: f64 = alpha.iter().sum();
        let draws = 100_000;
        let mut sums = [0.0; 3];
        for _ in 0..draws {
            let s = sample_simplex(&c, SamplerMode::ExactDirichlet, &mut rng);
            for (acc, p) in sums.iter_mut().zip(s.vector.components()) {
                *acc += p;
            }
        }
        for i in 0..3 {
            let mean = alpha[i] / a0;
            let var = alpha[i] * (a0 - alpha[i]) / (a0 * a0 * (a0 + 1.0));
            let se = (var / draws as f64).sqrt();
            let got = sums[i] / draws as f64;
            assert!((got - mean).abs() < 3.0 * se, "slot {i}: {got} vs {mean} (se {se})");
        }
    }

    #[test]
    fn rejection_cap_falls_back_to_center() {
        // Huge counts make acceptance astronomically unlikely.
        let mut rng = RandomSource::from_seed(3);
        let c = OutcomeCounts::with_unknown(&[300_000, 100_000]);
        let s = sample_simplex(&c, SamplerMode::PaperRejection, &mut rng);
        assert!(s.fallback);
        assert_eq!(s.proposals, REJECTION_RETRY_CAP);
        let n = 400_000.0;
        let u = 1.0 / (n + 2.0);
        let p = s.vector.components();
        assert!((p[0] - (1.0 - u) * 0.75).abs() < 1e-15);
        assert!((p[1] - (1.0 - u) * 0.25).abs() < 1e-15);
        assert_eq!(p[2], u);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sampler_stats_accumulate() {
        let mut stats = SamplerStats::default();
        stats.record(3, false);
        stats.record(REJECTION_RETRY_CAP, true);
        let mut total = SamplerStats::default();
        total.merge(&stats);
        total.merge(&stats);
        assert_eq!(total.draws, 4);
        assert_eq!(total.fallbacks, 2);
        assert_eq!(total.proposals, 2 * (3 + REJECTION_RETRY_CAP as u64));
    }

    #[test]
    fn mode_names_round_trip() {
        for m in [SamplerMode::PaperRejection, SamplerMode::ExactDirichlet] {
            assert_eq!(m.to_string().parse::<SamplerMode>().unwrap(), m);
        }
        assert!("gibbs".parse::<SamplerMode>().is_err());
    }

    proptest! {
        #[test]
        fn samples_are_valid_probability_vectors(
            observed in prop::collection::vec(0u64..40, 1..5),
            unknown in any::<bool>(),
            exact in any::<bool>(),
            seed in any::<u64>(),
        ) {
            let c = if unknown {
                OutcomeCounts::with_unknown(&observed)
            } else {
                OutcomeCounts::observed_only(&observed).unwrap()
            };
            let mode = if exact { SamplerMode::ExactDirichlet } else { SamplerMode::PaperRejection };
            let mut rng = RandomSource::from_seed(seed);
            let s = sample_simplex(&c, mode, &mut rng);
            let p = s.vector.components();
            prop_assert_eq!(p.len(), c.len());
            prop_assert!(p.iter().all(|x| (0.0..=1.0).contains(x)));
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!(ProbabilityVector::new(p.to_vec()).is_ok());
        }

        #[test]
        fn likelihood_peaks_at_mle(
            observed in prop::collection::vec(0u64..30, 2..5),
            raw in prop::collection::vec(0.01f64..1.0, 2..5),
        ) {
            prop_assume!(observed.iter().sum::<u64>() > 0);
            let k = observed.len().min(raw.len());
            let counts = OutcomeCounts::observed_only(&observed[..k]).unwrap();
            let n = counts.total() as f64;
            let mle: Vec<f64> = counts.slots().iter().map(|&c| c as f64 / n).collect();
            let at_mle = scaled_likelihood(&mle, counts.slots());
            prop_assert!((at_mle - 1.0).abs() < 1e-12);
            let total: f64 = raw[..k].iter().sum();
            let p: Vec<f64> = raw[..k].iter().map(|x| x / total).collect();
            let l = scaled_likelihood(&p, counts.slots());
            prop_assert!((0.0..=1.0).contains(&l));
            let dist: f64 = p.iter().zip(&mle).map(|(a, b)| (a - b).abs()).sum();
            if dist > 1e-6 {
                prop_assert!(l < 1.0);
            }
        }
    }
}
