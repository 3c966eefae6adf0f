//! Percentile bootstrap confidence intervals.

use crate::util::quantile_sorted;
use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Point estimate plus a percentile interval of the resampled statistic.
pub fn bootstrap_ci<F>(
    samples: &[f64],
    statistic: F,
    n_resamples: usize,
    level: f64,
    seed: u64,
) -> Result<(f64, f64, f64)>
where
    F: Fn(&[f64]) -> f64,
{
    if samples.is_empty() {
        return Err(Error::InvalidInput("bootstrap needs a nonempty sample".into()));
    }
    assert!((0.0..1.0).contains(&(1.0 - level)) && level > 0.0);
    let point = statistic(samples);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut resample = vec![0.0; samples.len()];
    let mut stats = Vec::with_capacity(n_resamples);
    for _ in 0..n_resamples {
        for slot in resample.iter_mut() {
            *slot = samples[rng.gen_range(0..samples.len())];
        }
        stats.push(statistic(&resample));
    }
    stats.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let alpha = (1.0 - level) / 2.0;
    let lo = quantile_sorted(&stats, alpha);
    let hi = quantile_sorted(&stats, 1.0 - alpha);
    Ok((point, lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::util::mean;

    #[test]
    fn constant_sample_degenerate_interval() {
        let (point, lo, hi) = bootstrap_ci(&[4.0; 12], mean, 200, 0.95, 1).unwrap();
        assert_eq!((point, lo, hi), (4.0, 4.0, 4.0));
    }

    #[test]
    fn same_seed_identical_interval() {
        let data: Vec<f64> = (0..50).map(|i| (i as f64 * 0.7).sin()).collect();
        let a = bootstrap_ci(&data, mean, 500, 0.95, 9).unwrap();
        let b = bootstrap_ci(&data, mean, 500, 0.95, 9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn interval_brackets_point_for_mean() {
        let data: Vec<f64> = (0..200).map(|i| (i % 17) as f64).collect();
        let (point, lo, hi) = bootstrap_ci(&data, mean, 2000, 0.95, 3).unwrap();
        assert!(lo <= point && point <= hi);
        assert!(lo < hi);
    }
}
