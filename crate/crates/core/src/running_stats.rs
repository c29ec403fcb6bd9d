//! Online mean/variance accumulators.
//!
//! `Cumulative` is Welford's one-pass recurrence and weights every sample
//! equally. `Ewma` tracks exponentially weighted first and second moments,
//! so old samples fade; variance is `E[x²] - E[x]²` clamped at zero.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AccumulatorMode {
    Cumulative,
    Ewma { beta: f64 },
}

impl AccumulatorMode {
    pub fn validate(self) -> Result<Self> {
        match self {
            AccumulatorMode::Ewma { beta } if !(beta > 0.0 && beta <= 1.0) => Err(Error::invalid(
                format!("ewma beta {beta} not in (0, 1]"),
            )),
            m => Ok(m),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanVarAccumulator {
    mode: AccumulatorMode,
    count: u64,
    mean: f64,
    /// Sum of squared deviations (cumulative) or running `E[x²]` (ewma).
    second: f64,
}

impl MeanVarAccumulator {
    pub fn new(mode: AccumulatorMode) -> Result<Self> {
        Ok(Self {
            mode: mode.validate()?,
            count: 0,
            mean: 0.0,
            second: 0.0,
        })
    }

    pub fn cumulative() -> Self {
        Self {
            mode: AccumulatorMode::Cumulative,
            count: 0,
            mean: 0.0,
            second: 0.0,
        }
    }

    pub fn ewma(beta: f64) -> Result<Self> {
        Self::new(AccumulatorMode::Ewma { beta })
    }

    pub fn mode(&self) -> AccumulatorMode {
        self.mode
    }

    pub fn push(&mut self, x: f64) -> Result<()> {
        if !x.is_finite() {
            return Err(Error::invalid(format!("non-finite sample {x}")));
        }
        self.push_finite(x);
        Ok(())
    }

    #[inline]
    pub(crate) fn push_finite(&mut self, x: f64) {
        self.count += 1;
        match self.mode {
            AccumulatorMode::Cumulative => {
                let delta = x - self.mean;
                self.mean += delta / self.count as f64;
                self.second += delta * (x - self.mean);
            }
            AccumulatorMode::Ewma { beta } => {
                if self.count == 1 {
                    self.mean = x;
                    self.second = x * x;
                } else {
                    self.mean += beta * (x - self.mean);
                    self.second += beta * (x * x - self.second);
                }
            }
        }
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Population variance (divides by `count` in cumulative mode). Never negative.
    pub fn variance(&self) -> f64 {
        if self.count == 0 {
            return 0.0;
        }
        let v = match self.mode {
            AccumulatorMode::Cumulative => self.second / self.count as f64,
            AccumulatorMode::Ewma { .. } => self.second - self.mean * self.mean,
        };
        v.max(0.0)
    }

    /// Unbiased variance in cumulative mode (0 for fewer than two samples);
    /// identical to [`variance`](Self::variance) in ewma mode.
    pub fn sample_variance(&self) -> f64 {
        match self.mode {
            AccumulatorMode::Cumulative if self.count < 2 => 0.0,
            AccumulatorMode::Cumulative => (self.second / (self.count - 1) as f64).max(0.0),
            AccumulatorMode::Ewma { .. } => self.variance(),
        }
    }

    /// Standard deviation, or `sigma_init` while fewer than two samples exist.
    #[inline]
    pub fn std_dev(&self, sigma_init: f64) -> f64 {
        if self.count < 2 {
            sigma_init
        } else {
            self.variance().sqrt()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Two-pass reference: mean first, then mean squared deviation.
    pub(crate) fn two_pass(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
        (mean, var)
    }

    /// Relative closeness, with values below 1 in magnitude compared absolutely.
    pub(crate) fn rel_close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
    }

    #[test]
    fn constant_stream() {
        let mut acc = MeanVarAccumulator::cumulative();
        for _ in 0..3 {
            acc.push(1.0).unwrap();
        }
        assert_eq!(acc.mean(), 1.0);
        assert_eq!(acc.variance(), 0.0);
    }

    #[test]
    fn two_symmetric_points() {
        let mut acc = MeanVarAccumulator::cumulative();
        acc.push(0.0).unwrap();
        acc.push(2.0).unwrap();
        assert_eq!(acc.mean(), 1.0);
        assert_eq!(acc.variance(), 1.0);
        assert_eq!(acc.std_dev(5.0), 1.0);
        assert_eq!(acc.sample_variance(), 2.0);
    }

    #[test]
    fn ewma_two_steps() {
        let mut acc = MeanVarAccumulator::ewma(0.5).unwrap();
        acc.push(0.0).unwrap();
        acc.push(1.0).unwrap();
        assert_eq!(acc.mean(), 0.5);
        assert_eq!(acc.second, 0.5);
        assert_eq!(acc.variance(), 0.25);
    }

    #[test]
    fn fresh_accumulator_reports_prior() {
        let acc = MeanVarAccumulator::cumulative();
        assert_eq!(acc.std_dev(5.0), 5.0);
        let mut one = MeanVarAccumulator::ewma(0.1).unwrap();
        one.push(3.0).unwrap();
        assert_eq!(one.std_dev(5.0), 5.0);
    }

    #[test]
    fn uniform_stream_std_dev() {
        use rand::Rng;
        let mut rng = crate::rng::RandomSource::from_seed(12);
        let mut acc = MeanVarAccumulator::cumulative();
        for _ in 0..10_000 {
            acc.push(rng.random::<f64>()).unwrap();
        }
        assert!((acc.std_dev(0.0) - 1.0 / 12f64.sqrt()).abs() < 0.01);
    }

    #[test]
    fn rejects_non_finite_and_bad_beta() {
        let mut acc = MeanVarAccumulator::cumulative();
        assert!(acc.push(f64::NAN).is_err());
        assert!(acc.push(f64::INFINITY).is_err());
        assert_eq!(acc.count(), 0);
        assert!(MeanVarAccumulator::ewma(0.0).is_err());
        assert!(MeanVarAccumulator::ewma(1.5).is_err());
        assert!(MeanVarAccumulator::ewma(1.0).is_ok());
    }

    #[test]
    fn ewma_constant_stream_variance_vanishes() {
        let mut acc = MeanVarAccumulator::ewma(0.1).unwrap();
        acc.push(-4.0).unwrap();
        acc.push(10.0).unwrap();
        let early = acc.variance();
        for _ in 0..2_000 {
            acc.push(3.0).unwrap();
        }
        assert!(early > 1.0);
        assert!(acc.variance() < 1e-12);
    }

    #[test]
    fn near_identical_large_values_never_negative() {
        for mode in [AccumulatorMode::Cumulative, AccumulatorMode::Ewma { beta: 0.3 }] {
            let mut acc = MeanVarAccumulator::new(mode).unwrap();
            for i in 0..10_000 {
                acc.push(1e15 + (i % 3) as f64 * 1e-1).unwrap();
                assert!(acc.variance() >= 0.0);
                assert!(acc.std_dev(1.0) >= 0.0);
            }
        }
    }

    proptest! {
        #[test]
        fn matches_two_pass(xs in prop::collection::vec(-1e3f64..1e3, 1..2000), offset in -1e4f64..1e4) {
            let xs: Vec<f64> = xs.iter().map(|x| x + offset).collect();
            let mut acc = MeanVarAccumulator::cumulative();
            for &x in &xs {
                acc.push(x).unwrap();
            }
            let (mean, var) = two_pass(&xs);
            prop_assert!(rel_close(acc.mean(), mean, 1e-10));
            prop_assert!(rel_close(acc.variance(), var, 1e-10), "{} vs {}", acc.variance(), var);
        }

        #[test]
        fn order_independent(xs in prop::collection::vec(-1e3f64..1e3, 2..500), seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            let mut shuffled = xs.clone();
            shuffled.shuffle(&mut crate::rng::RandomSource::from_seed(seed));
            let mut a = MeanVarAccumulator::cumulative();
            let mut b = MeanVarAccumulator::cumulative();
            xs.iter().for_each(|&x| a.push(x).unwrap());
            shuffled.iter().for_each(|&x| b.push(x).unwrap());
            prop_assert!(rel_close(a.mean(), b.mean(), 1e-10));
            prop_assert!(rel_close(a.variance(), b.variance(), 1e-10));
        }
    }
}
