//! Closed-form tests and effect sizes.

use super::{EffectSize, TestResult};
use crate::util::mean;
use crate::{Error, Result};
use statrs::distribution::{ChiSquared, ContinuousCDF, StudentsT};

fn sum_sq_dev(v: &[f64]) -> f64 {
    let m = mean(v);
    v.iter().map(|x| (x - m) * (x - m)).sum()
}

fn two_sided_t_p(t: f64, df: f64) -> f64 {
    let dist = StudentsT::new(0.0, 1.0, df).expect("valid dof");
    (2.0 * dist.cdf(-t.abs())).clamp(0.0, 1.0)
}

/// Two-sided independent-samples Student t test with pooled variance.
pub fn student_t_independent(a: &[f64], b: &[f64]) -> Result<TestResult> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::InvalidInput("t test needs >= 2 values per group".into()));
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let df = na + nb - 2.0;
    let pooled_var = (sum_sq_dev(a) + sum_sq_dev(b)) / df;
    if pooled_var <= 0.0 {
        return Err(Error::DegenerateVariance("pooled variance is zero"));
    }
    let se = (pooled_var * (1.0 / na + 1.0 / nb)).sqrt();
    let t = (mean(a) - mean(b)) / se;
    Ok(TestResult {
        statistic: t,
        p_value: two_sided_t_p(t, df),
        n_a: a.len(),
        n_b: b.len(),
        method: "student_t",
        seed: None,
    })
}

/// Welch's unequal-variance t test (Satterthwaite degrees of freedom).
pub fn welch_t_independent(a: &[f64], b: &[f64]) -> Result<TestResult> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::InvalidInput("t test needs >= 2 values per group".into()));
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let va = sum_sq_dev(a) / (na - 1.0);
    let vb = sum_sq_dev(b) / (nb - 1.0);
    if va + vb <= 0.0 {
        return Err(Error::DegenerateVariance("both variances are zero"));
    }
    let se2 = va / na + vb / nb;
    let t = (mean(a) - mean(b)) / se2.sqrt();
    let df = se2 * se2 / ((va / na).powi(2) / (na - 1.0) + (vb / nb).powi(2) / (nb - 1.0));
    Ok(TestResult {
        statistic: t,
        p_value: two_sided_t_p(t, df),
        n_a: a.len(),
        n_b: b.len(),
        method: "welch_t",
        seed: None,
    })
}

/// Pearson correlation coefficient.
pub fn pearson_r(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 3 {
        return Err(Error::InvalidInput(
            "pearson_r needs equal lengths >= 3".into(),
        ));
    }
    let (mx, my) = (mean(x), mean(y));
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        sxy += (xi - mx) * (yi - my);
        sxx += (xi - mx) * (xi - mx);
        syy += (yi - my) * (yi - my);
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return Err(Error::DegenerateVariance("constant input to pearson_r"));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Pearson chi-squared test of independence on an r x c count table.
pub fn chi_squared_independence(table: &[Vec<f64>]) -> Result<TestResult> {
    let r = table.len();
    let c = table.first().map_or(0, |row| row.len());
    if r < 2 || c < 2 || table.iter().any(|row| row.len() != c) {
        return Err(Error::DegenerateTable("need a rectangular table >= 2x2"));
    }
    let row_sums: Vec<f64> = table.iter().map(|row| row.iter().sum()).collect();
    let col_sums: Vec<f64> = (0..c).map(|j| table.iter().map(|row| row[j]).sum()).collect();
    let n: f64 = row_sums.iter().sum();
    if row_sums.iter().chain(&col_sums).any(|&s| s <= 0.0) {
        return Err(Error::DegenerateTable("zero row or column margin"));
    }
    let mut chi2 = 0.0;
    for i in 0..r {
        for j in 0..c {
            let e = row_sums[i] * col_sums[j] / n;
            let d = table[i][j] - e;
            chi2 += d * d / e;
        }
    }
    let df = ((r - 1) * (c - 1)) as f64;
    let p = if chi2 <= 0.0 {
        1.0
    } else {
        let dist = ChiSquared::new(df).expect("valid dof");
        (1.0 - dist.cdf(chi2)).clamp(0.0, 1.0)
    };
    Ok(TestResult {
        statistic: chi2,
        p_value: p,
        n_a: n as usize,
        n_b: 0,
        method: "chi_squared",
        seed: None,
    })
}

/// Cramer's V effect size: sqrt(chi2 / (N * (min(r, c) - 1))).
pub fn cramers_v(table: &[Vec<f64>]) -> Result<EffectSize> {
    let t = chi_squared_independence(table)?;
    let r = table.len();
    let c = table[0].len();
    let n = t.n_a as f64;
    let v = (t.statistic / (n * (r.min(c) - 1) as f64)).sqrt();
    Ok(EffectSize::CramersV(v.min(1.0)))
}

/// Cohen's d with the df-weighted pooled standard deviation.
pub fn cohens_d(a: &[f64], b: &[f64]) -> Result<EffectSize> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::InvalidInput("cohens_d needs >= 2 values per group".into()));
    }
    let df = (a.len() + b.len() - 2) as f64;
    let pooled = ((sum_sq_dev(a) + sum_sq_dev(b)) / df).sqrt();
    if pooled <= 0.0 {
        return Err(Error::DegenerateVariance("pooled sd is zero"));
    }
    Ok(EffectSize::CohensD((mean(a) - mean(b)) / pooled))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn identical_samples_t_zero_p_one() {
        let a = [1.0, 2.0, 3.0];
        let r = student_t_independent(&a, &a).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn large_shift_is_significant() {
        let a = [1.0, 2.0, 3.0];
        let b = [101.0, 102.0, 103.0];
        let r = student_t_independent(&a, &b).unwrap();
        assert!(r.p_value < 0.01);
        assert!(r.statistic < 0.0);
    }

    #[test]
    fn constant_samples_degenerate() {
        let a = [2.0, 2.0];
        assert!(matches!(
            student_t_independent(&a, &a),
            Err(Error::DegenerateVariance(_))
        ));
    }

    #[test]
    fn pearson_hand_cases() {
        let x = [1.0, 2.0, 3.0];
        assert_eq!(pearson_r(&x, &x).unwrap(), 1.0);
        let y: Vec<f64> = x.iter().map(|v| -2.0 * v + 7.0).collect();
        assert_eq!(pearson_r(&x, &y).unwrap(), -1.0);
        let y2 = [1.0, 2.0, 4.0];
        assert_relative_eq!(pearson_r(&x, &y2).unwrap(), 0.9820, epsilon = 1e-4);
        assert!(pearson_r(&x, &[5.0, 5.0, 5.0]).is_err());
    }

    #[test]
    fn chi_squared_cases() {
        // proportional rows: no association
        let t = chi_squared_independence(&[vec![10.0, 20.0], vec![5.0, 10.0]]).unwrap();
        assert!(t.statistic.abs() < 1e-9);
        assert_eq!(t.p_value, 1.0);

        let t = chi_squared_independence(&[vec![10.0, 0.0], vec![0.0, 10.0]]).unwrap();
        assert_eq!(t.statistic, 20.0);
        assert!(t.p_value < 1e-4);

        assert!(matches!(
            chi_squared_independence(&[vec![0.0, 0.0], vec![1.0, 2.0]]),
            Err(Error::DegenerateTable(_))
        ));
    }

    #[test]
    fn cramers_v_cases() {
        let v = cramers_v(&[vec![10.0, 20.0], vec![5.0, 10.0]]).unwrap();
        assert!(v.value() < 1e-6);
        let v = cramers_v(&[vec![10.0, 0.0], vec![0.0, 10.0]]).unwrap();
        assert_eq!(v.value(), 1.0);
        let v = cramers_v(&[vec![30.0, 10.0], vec![10.0, 30.0]]).unwrap();
        assert_relative_eq!(v.value(), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn cohens_d_hand_case() {
        let d = cohens_d(&[1.0, 2.0, 3.0], &[3.0, 4.0, 5.0]).unwrap();
        assert_eq!(d.value(), -2.0);
        let same = cohens_d(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(same.value(), 0.0);
    }

    #[test]
    fn one_sd_shift_gives_unit_d() {
        // sum of squared deviations 2 + 2 over df = 4 gives pooled sd 1
        let a = [0.0, 1.0, 2.0];
        let b = [1.0, 2.0, 3.0];
        let d = cohens_d(&a, &b).unwrap();
        assert_relative_eq!(d.value().abs(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn welch_close_to_student_on_equal_variances() {
        let a = [1.0, 2.0, 3.0, 4.0, 5.0];
        let b = [2.0, 3.0, 4.0, 5.0, 6.0];
        let s = student_t_independent(&a, &b).unwrap();
        let w = welch_t_independent(&a, &b).unwrap();
        assert_relative_eq!(s.statistic, w.statistic, epsilon = 1e-12);
        assert_relative_eq!(s.p_value, w.p_value, epsilon = 1e-6);
    }
}
