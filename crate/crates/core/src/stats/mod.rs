//! The statistical battery: parametric and permutation tests, rank tests,
//! effect sizes, bootstrap confidence intervals, and the group-comparison
//! driver for saliency scores.
//!
//! Every randomized routine is a pure function of its inputs and an
//! explicit seed.

mod bootstrap;
mod compare;
mod parametric;
mod permutation;
mod rank;
mod summary;

pub use bootstrap::bootstrap_ci;
pub use compare::{group_compare_cam, GroupCompareRow};
pub use parametric::{
    chi_squared_independence, cohens_d, cramers_v, pearson_r, student_t_independent,
    welch_t_independent,
};
pub use permutation::{permutation_test_mean_diff, permutation_test_pearson};
pub use rank::{mann_whitney_u, mann_whitney_u_with_mode, MannWhitneyMode};
pub use summary::{summarize, SummaryStats};

use serde::{Deserialize, Serialize};

/// Outcome of a two-sample or correlation test.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
    pub n_a: usize,
    pub n_b: usize,
    pub method: &'static str,
    /// Seed used by randomized tests; `None` for deterministic ones.
    pub seed: Option<u64>,
}

/// Effect size measure.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub enum EffectSize {
    CohensD(f64),
    CramersV(f64),
}

impl EffectSize {
    pub fn value(self) -> f64 {
        match self {
            EffectSize::CohensD(v) | EffectSize::CramersV(v) => v,
        }
    }
}
