//! Chi-square tests over exact histograms.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: u64,
    pub p_value: f64,
}

impl ChiSquare {
    fn from_statistic(statistic: f64, dof: u64) -> Self {
        let p_value = if dof == 0 {
            1.0
        } else {
            ChiSquared::new(dof as f64)
                .map(|d| d.sf(statistic))
                .unwrap_or(f64::NAN)
        };
        Self {
            statistic,
            dof,
            p_value,
        }
    }

    pub fn passes(&self, alpha: f64) -> bool {
        self.p_value >= alpha
    }
}

/// Goodness of fit of `counts` against the uniform distribution on its cells.
pub fn uniform(counts: &[u64]) -> ChiSquare {
    let total: u64 = counts.iter().sum();
    let expected = total as f64 / counts.len() as f64;
    let statistic = counts
        .iter()
        .map(|&c| {
            let d = c as f64 - expected;
            d * d / expected
        })
        .sum();
    ChiSquare::from_statistic(statistic, counts.len().saturating_sub(1) as u64)
}

/// Two-sample homogeneity test on a `2 x k` contingency table. Cells empty
/// in both samples are dropped.
pub fn homogeneity(a: &[u64], b: &[u64]) -> ChiSquare {
    assert_eq!(a.len(), b.len());
    let (na, nb) = (a.iter().sum::<u64>() as f64, b.iter().sum::<u64>() as f64);
    let total = na + nb;
    let mut statistic = 0.0;
    let mut cells = 0u64;
    for (&x, &y) in a.iter().zip(b) {
        let col = (x + y) as f64;
        if col == 0.0 {
            continue;
        }
        cells += 1;
        for (obs, row) in [(x as f64, na), (y as f64, nb)] {
            let expected = row * col / total;
            statistic += (obs - expected).powi(2) / expected;
        }
    }
    ChiSquare::from_statistic(statistic, cells.saturating_sub(1))
}

/// Standard deviation of a binomial proportion.
pub fn binomial_sigma(p: f64, trials: u64) -> f64 {
    (p * (1.0 - p) / trials as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfectly_uniform_counts() {
        let r = uniform(&[100, 100, 100, 100]);
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.dof, 3);
        assert!((r.p_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn skewed_counts_fail() {
        let r = uniform(&[400, 100, 100, 100]);
        // (225 + 3 * 0 ... ) computed by hand: expected 175, (225^2 + 3*75^2)/175
        assert!((r.statistic - (225.0f64.powi(2) + 3.0 * 75.0f64.powi(2)) / 175.0).abs() < 1e-9);
        assert!(!r.passes(0.01));
    }

    #[test]
    fn known_p_value() {
        // chi-square with 1 dof at 3.841459 has upper tail 0.05
        let r = ChiSquare::from_statistic(3.841_458_820_694_124, 1);
        assert!((r.p_value - 0.05).abs() < 1e-9);
    }

    #[test]
    fn homogeneity_of_identical_samples() {
        let r = homogeneity(&[10, 20, 0, 30], &[20, 40, 0, 60]);
        assert!(r.statistic.abs() < 1e-12);
        assert_eq!(r.dof, 2);
        assert!(!homogeneity(&[100, 0], &[0, 100]).passes(0.01));
    }
}
