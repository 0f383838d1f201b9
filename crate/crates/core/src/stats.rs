use serde::{Deserialize, Serialize};

use crate::error::StatsError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub ci95_low: f64,
    pub ci95_high: f64,
}

/// Arithmetic mean and the empirical 2.5th / 97.5th percentiles.
///
/// With a heavily skewed sample the mean can fall outside the percentile
/// band; the band is then widened to reach the mean.
pub fn aggregate(samples: &[f64]) -> Result<Summary, StatsError> {
    if samples.is_empty() {
        return Err(StatsError::EmptySample);
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mean = (samples.iter().sum::<f64>() / samples.len() as f64)
        .clamp(sorted[0], sorted[sorted.len() - 1]);
    Ok(Summary {
        mean,
        ci95_low: percentile_sorted(&sorted, 2.5).min(mean),
        ci95_high: percentile_sorted(&sorted, 97.5).max(mean),
    })
}

/// Percentile `p` (0..=100) by linear interpolation between order statistics
/// at rank `(n - 1) · p / 100`.
pub fn percentile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let rank = (n - 1) as f64 * p / 100.0;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    let frac = rank - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}
