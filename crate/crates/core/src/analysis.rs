//! Statistical checks used when comparing agents.

use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

/// Result of a paired t-test on `a[i] - b[i]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairedTest {
    pub pairs: usize,
    pub mean_diff: f64,
    pub stderr: f64,
    pub t: f64,
    /// One-sided p-value for the alternative `mean(a - b) > 0`.
    pub p_greater: f64,
}

/// Paired t-test over equally long samples (at least two pairs).
pub fn paired_t_test(a: &[f64], b: &[f64]) -> Result<PairedTest> {
    if a.len() != b.len() || a.len() < 2 {
        return Err(Error::invalid(format!(
            "paired test needs two equal samples of length >= 2 (got {} and {})",
            a.len(),
            b.len()
        )));
    }
    let n = a.len() as f64;
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let mean = diffs.iter().sum::<f64>() / n;
    let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let stderr = (var / n).sqrt();
    let (t, p_greater) = if stderr > 0.0 {
        let t = mean / stderr;
        let dist = StudentsT::new(0.0, 1.0, n - 1.0).map_err(|e| Error::invalid(e.to_string()))?;
        (t, dist.sf(t))
    } else if mean > 0.0 {
        (f64::INFINITY, 0.0)
    } else if mean < 0.0 {
        (f64::NEG_INFINITY, 1.0)
    } else {
        (0.0, 0.5)
    };
    Ok(PairedTest {
        pairs: a.len(),
        mean_diff: mean,
        stderr,
        t,
        p_greater,
    })
}

/// Kolmogorov-Smirnov distance between the empirical distribution of
/// `samples` and the continuous CDF `cdf`.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter().enumerate().fold(0.0, |d, (i, &x)| {
        let f = cdf(x);
        d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n)
    })
}

/// Asymptotic KS critical value for a one-sample test at level `alpha`.
pub fn ks_critical(n: usize, alpha: f64) -> f64 {
    (-(alpha / 2.0).ln() / 2.0).sqrt() / (n as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paired_test_hand_values() {
        // Differences 1, 2, 3: mean 2, sd 1, stderr 1/sqrt(3).
        let r = paired_t_test(&[2.0, 4.0, 6.0], &[1.0, 2.0, 3.0]).unwrap();
        assert!((r.mean_diff - 2.0).abs() < 1e-12);
        assert!((r.t - 2.0 * 3f64.sqrt()).abs() < 1e-12);
        // t = 3.4641 with 2 df: one-sided p = 0.03709.
        assert!((r.p_greater - 0.037_089).abs() < 1e-5);
    }

    #[test]
    fn paired_test_degenerate() {
        assert_eq!(paired_t_test(&[1.0, 1.0], &[0.0, 0.0]).unwrap().p_greater, 0.0);
        assert_eq!(paired_t_test(&[0.0, 0.0], &[1.0, 1.0]).unwrap().p_greater, 1.0);
        assert!(paired_t_test(&[1.0], &[0.0]).is_err());
        assert!(paired_t_test(&[1.0, 2.0], &[0.0]).is_err());
    }

    #[test]
    fn ks_of_uniform_grid() {
        let xs: Vec<f64> = (0..100).map(|i| (i as f64 + 0.5) / 100.0).collect();
        let d = ks_statistic(&xs, |x| x.clamp(0.0, 1.0));
        assert!((d - 0.005).abs() < 1e-12);
        assert!((ks_critical(100, 0.05) - 0.1358).abs() < 1e-3);
    }
}
