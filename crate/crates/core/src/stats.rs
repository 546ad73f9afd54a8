//! Desk-scale randomness statistics for cipher and differential images.

use serde::Serialize;
use statrs::distribution::{Binomial, Discrete};

use crate::image::Image;
use crate::GRAY_LEVELS;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RandomnessStats {
    /// Fraction of one bits over all `8 * M * N` pixel bits.
    pub ones_fraction: f64,
    /// Pearson chi-square of the byte histogram against uniform (255 dof).
    pub chi_square_256: f64,
    pub zero_pixel_fraction: f64,
}

impl RandomnessStats {
    pub fn to_key_value(&self) -> String {
        format!(
            "ones_fraction={:.6}\nchi_square_256={:.3}\nzero_pixel_fraction={:.6}\n",
            self.ones_fraction, self.chi_square_256, self.zero_pixel_fraction
        )
    }
}

pub fn randomness_stats(img: &Image) -> RandomnessStats {
    let n = img.pixels().len() as f64;
    let hist = img.histogram();
    let ones: u64 = img.pixels().iter().map(|p| u64::from(p.count_ones())).sum();
    let expected = n / GRAY_LEVELS as f64;
    let chi_square_256 = hist
        .iter()
        .map(|&c| {
            let d = c as f64 - expected;
            d * d / expected
        })
        .sum();
    RandomnessStats {
        ones_fraction: ones as f64 / (8.0 * n),
        chi_square_256,
        zero_pixel_fraction: hist[0] as f64 / n,
    }
}

/// Exact two-sided binomial test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BinomialTest {
    pub successes: u64,
    pub trials: u64,
    pub rate: f64,
    pub p_value: f64,
}

impl BinomialTest {
    pub fn rejects_at(&self, significance: f64) -> bool {
        self.p_value < significance
    }
}

/// Sums the probabilities of all outcomes no more likely than the observed
/// one (the minimum-likelihood two-sided p-value).
pub fn binomial_test(successes: u64, trials: u64, rate: f64) -> BinomialTest {
    let dist = Binomial::new(rate, trials).expect("rate in [0, 1]");
    let observed = dist.pmf(successes);
    let cutoff = observed * (1.0 + 1e-7);
    let p_value = (0..=trials)
        .map(|k| dist.pmf(k))
        .filter(|&p| p <= cutoff)
        .sum::<f64>()
        .min(1.0);
    BinomialTest {
        successes,
        trials,
        rate,
        p_value,
    }
}
