//! Statistical acceptance helpers used by experiments and tests.
//!
//! Thresholds are expressed in sigmas of a standard normal and converted to
//! tail probabilities, so "4 sigma" means the check falsely fails about once
//! in sixteen thousand runs.

use statrs::distribution::{ChiSquared, ContinuousCDF};
use statrs::function::erf::erfc;

/// Two-sided tail probability of a standard normal at `sigma` deviations.
pub fn sigma_to_alpha(sigma: f64) -> f64 {
    erfc(sigma / std::f64::consts::SQRT_2)
}

/// Outcome of a chi-square goodness-of-fit check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquareOutcome {
    pub statistic: f64,
    pub threshold: f64,
    pub dof: u64,
    pub pass: bool,
}

/// Chi-square test of `counts` against the uniform distribution over its
/// cells, accepted at the `sigma`-equivalent significance level.
pub fn chi_square_uniform(counts: &[u64], sigma: f64) -> ChiSquareOutcome {
    let k = counts.len();
    assert!(k >= 2, "need at least two cells");
    let total: u64 = counts.iter().sum();
    assert!(total > 0, "need at least one observation");
    let expected = total as f64 / k as f64;
    let statistic: f64 = counts
        .iter()
        .map(|&c| {
            let d = c as f64 - expected;
            d * d / expected
        })
        .sum();
    let dof = (k - 1) as u64;
    let alpha = sigma_to_alpha(sigma);
    let threshold = ChiSquared::new(dof as f64)
        .expect("dof >= 1")
        .inverse_cdf(1.0 - alpha);
    ChiSquareOutcome {
        statistic,
        threshold,
        dof,
        pass: statistic <= threshold,
    }
}

/// True when the observed frequency is consistent with probability `p`
/// within `sigma` binomial standard deviations.
pub fn matches_probability(successes: u64, trials: u64, p: f64, sigma: f64) -> bool {
    assert!(trials > 0);
    assert!((0.0..=1.0).contains(&p));
    let observed = successes as f64 / trials as f64;
    let sd = (p * (1.0 - p) / trials as f64).sqrt();
    if sd == 0.0 {
        return observed == p;
    }
    (observed - p).abs() <= sigma * sd
}

/// True when the observed frequency does not exceed `bound` by more than
/// `sigma` binomial standard deviations (one-sided).
pub fn within_upper_bound(successes: u64, trials: u64, bound: f64, sigma: f64) -> bool {
    assert!(trials > 0);
    assert!((0.0..=1.0).contains(&bound));
    let observed = successes as f64 / trials as f64;
    let sd = (bound * (1.0 - bound) / trials as f64).sqrt();
    observed <= bound + sigma * sd
}

/// Wilson score interval for a binomial proportion at `sigma` deviations.
pub fn wilson_interval(successes: u64, trials: u64, sigma: f64) -> (f64, f64) {
    assert!(trials > 0);
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = sigma * sigma;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = sigma * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}
