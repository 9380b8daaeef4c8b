//! Experiment statistics: percentile bootstrap of the mean, trimmed
//! percentile intervals, and histograms.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Percentile bootstrap confidence interval for the mean.
pub fn bootstrap_ci<S: Scalar>(
    samples: &[S],
    resamples: usize,
    level: S,
    seed: u64,
) -> Result<(S, S)> {
    if samples.len() < 2 {
        return Err(Error::TooFewSamples {
            required: 2,
            got: samples.len(),
        });
    }
    if resamples == 0 {
        return Err(Error::InvalidParameter {
            name: "resamples",
            requirement: "at least 1",
            value: 0.0,
        });
    }
    if !(level > S::zero() && level < S::one()) {
        return Err(Error::InvalidParameter {
            name: "level",
            requirement: "inside (0,1)",
            value: level.as_f64(),
        });
    }
    let n = samples.len();
    let inv_n = S::one() / S::of_usize(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut means: Vec<S> = (0..resamples)
        .map(|_| {
            let mut sum = S::zero();
            for _ in 0..n {
                sum = sum + samples[rng.random_range(0..n)];
            }
            sum * inv_n
        })
        .collect();
    means.sort_by(|a, b| a.partial_cmp(b).expect("finite statistics"));
    let alpha = (S::one() - level).as_f64();
    let low_idx = ((alpha / 2.0) * resamples as f64) as usize;
    let high_idx = (((1.0 - alpha / 2.0) * resamples as f64) as usize).min(resamples - 1);
    Ok((means[low_idx], means[high_idx]))
}

/// Symmetric trimmed percentile interval: with `trim = 0.10`, no more than
/// 10% of the samples lie above the upper endpoint or below the lower one,
/// so the interval contains at least 80% of the samples.
pub fn percentile_interval<S: Scalar>(samples: &[S], trim: S) -> Result<(S, S)> {
    if samples.is_empty() {
        return Err(Error::TooFewSamples {
            required: 1,
            got: 0,
        });
    }
    let trim_f = trim.as_f64();
    if !(0.0..0.5).contains(&trim_f) {
        return Err(Error::InvalidParameter {
            name: "trim",
            requirement: "inside [0, 0.5)",
            value: trim_f,
        });
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite statistics"));
    let n = sorted.len();
    let cut = ((n as f64) * trim_f) as usize;
    Ok((sorted[cut], sorted[n - 1 - cut]))
}

/// Fixed-width histogram over the sample range.
#[derive(Clone, Debug, PartialEq)]
pub struct Histogram<S> {
    /// `(bin_low, bin_high, count)` triples covering `[min, max]`.
    pub bins: Vec<(S, S, u64)>,
}

impl<S: Scalar> Histogram<S> {
    pub fn total_count(&self) -> u64 {
        self.bins.iter().map(|&(_, _, c)| c).sum()
    }
}

pub fn histogram<S: Scalar>(samples: &[S], n_bins: usize) -> Result<Histogram<S>> {
    if samples.is_empty() {
        return Err(Error::TooFewSamples {
            required: 1,
            got: 0,
        });
    }
    if n_bins == 0 {
        return Err(Error::InvalidParameter {
            name: "n_bins",
            requirement: "at least 1",
            value: 0.0,
        });
    }
    let min = samples.iter().copied().fold(S::infinity(), S::min);
    let max = samples.iter().copied().fold(S::neg_infinity(), S::max);
    if min == max {
        return Ok(Histogram {
            bins: vec![(min, max, samples.len() as u64)],
        });
    }
    let width = (max - min) / S::of_usize(n_bins);
    let mut counts = vec![0u64; n_bins];
    for &x in samples {
        let idx = ((x - min) / width).as_f64() as usize;
        counts[idx.min(n_bins - 1)] += 1;
    }
    let bins = counts
        .into_iter()
        .enumerate()
        .map(|(i, count)| {
            let low = min + width * S::of_usize(i);
            let high = if i + 1 == n_bins {
                max
            } else {
                min + width * S::of_usize(i + 1)
            };
            (low, high, count)
        })
        .collect();
    Ok(Histogram { bins })
}
