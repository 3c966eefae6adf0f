//! Five-number population summaries used by the report tables.

use crate::util::{mean, quantile_sorted, sample_sd};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
}

/// Mean, n-1 standard deviation, and linearly interpolated quartiles.
/// Panics on empty input.
pub fn summarize(values: &[f64]) -> SummaryStats {
    assert!(!values.is_empty(), "summarize needs at least one value");
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    SummaryStats {
        n: values.len(),
        mean: mean(values),
        sd: sample_sd(values),
        median: quantile_sorted(&sorted, 0.5),
        q1: quantile_sorted(&sorted, 0.25),
        q3: quantile_sorted(&sorted, 0.75),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolated_quartiles() {
        let s = summarize(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(s.median, 2.5);
        assert_eq!(s.q1, 1.75);
        assert_eq!(s.q3, 3.25);
    }

    #[test]
    fn singleton_collapses() {
        let s = summarize(&[7.0]);
        assert_eq!((s.mean, s.sd, s.median, s.q1, s.q3), (7.0, 0.0, 7.0, 7.0, 7.0));
    }

    #[test]
    fn constant_sample_zero_sd() {
        let s = summarize(&[2.0, 2.0, 2.0]);
        assert_eq!(s.sd, 0.0);
    }
}
