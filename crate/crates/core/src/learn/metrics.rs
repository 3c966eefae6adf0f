//! Evaluation metrics and bootstrapped confidence intervals.

use crate::util::quantile_sorted;
use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Mean of per-class recall over the classes present in `truth`.
/// A constant predictor scores exactly 1 / (number of classes).
pub fn balanced_accuracy(pred: &[usize], truth: &[usize]) -> Result<f64> {
    if pred.is_empty() || pred.len() != truth.len() {
        return Err(Error::InvalidInput("balanced_accuracy needs aligned rows".into()));
    }
    let classes: std::collections::BTreeSet<usize> = truth.iter().copied().collect();
    let mut recall_sum = 0.0;
    for &c in &classes {
        let total = truth.iter().filter(|&&t| t == c).count();
        let hit = truth
            .iter()
            .zip(pred)
            .filter(|(&t, &p)| t == c && p == c)
            .count();
        recall_sum += hit as f64 / total as f64;
    }
    Ok(recall_sum / classes.len() as f64)
}

/// Binary AUROC by trapezoidal integration of the ROC curve (Fawcett's
/// algorithm); tied scores earn half credit. This route is independent of
/// the rank-sum construction and must agree with U / (n1 n0) exactly.
pub fn auroc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    if scores.len() != labels.len() || scores.is_empty() {
        return Err(Error::InvalidInput("auroc needs aligned rows".into()));
    }
    let n_pos = labels.iter().filter(|&&l| l).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::MissingClass(
            if n_pos == 0 { "positive" } else { "negative" }.into(),
        ));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&i, &j| scores[j].partial_cmp(&scores[i]).unwrap());

    let mut auc = 0.0;
    let (mut tp, mut fp) = (0usize, 0usize);
    let (mut prev_tp, mut prev_fp) = (0usize, 0usize);
    let mut prev_score = f64::INFINITY;
    for &i in &order {
        if scores[i] != prev_score {
            auc += (fp - prev_fp) as f64 * (tp + prev_tp) as f64 / 2.0;
            prev_tp = tp;
            prev_fp = fp;
            prev_score = scores[i];
        }
        if labels[i] {
            tp += 1;
        } else {
            fp += 1;
        }
    }
    auc += (fp - prev_fp) as f64 * (tp + prev_tp) as f64 / 2.0;
    Ok(auc / (n_pos as f64 * n_neg as f64))
}

/// Macro-averaged one-vs-rest AUROC from class probabilities.
pub fn auroc_multiclass(proba: &[Vec<f64>], truth: &[usize], n_classes: usize) -> Result<f64> {
    if n_classes == 2 {
        let scores: Vec<f64> = proba.iter().map(|p| p[1]).collect();
        let labels: Vec<bool> = truth.iter().map(|&t| t == 1).collect();
        return auroc(&scores, &labels);
    }
    let mut sum = 0.0;
    let mut used = 0;
    for c in 0..n_classes {
        let labels: Vec<bool> = truth.iter().map(|&t| t == c).collect();
        if !labels.iter().any(|&l| l) {
            return Err(Error::MissingClass(format!("class {c} absent")));
        }
        let scores: Vec<f64> = proba.iter().map(|p| p[c]).collect();
        sum += auroc(&scores, &labels)?;
        used += 1;
    }
    Ok(sum / used as f64)
}

/// Coefficient of determination; negative when predictions underperform
/// the mean.
pub fn r2(pred: &[f64], truth: &[f64]) -> Result<f64> {
    if pred.len() != truth.len() || truth.len() < 2 {
        return Err(Error::InvalidInput("r2 needs >= 2 aligned rows".into()));
    }
    let mean = truth.iter().sum::<f64>() / truth.len() as f64;
    let ss_tot: f64 = truth.iter().map(|t| (t - mean) * (t - mean)).sum();
    if ss_tot <= 0.0 {
        return Err(Error::DegenerateVariance("constant truth in r2"));
    }
    let ss_res: f64 = pred
        .iter()
        .zip(truth)
        .map(|(p, t)| (p - t) * (p - t))
        .sum();
    Ok(1.0 - ss_res / ss_tot)
}

/// Bootstrap a row-resampled metric: the closure receives resampled row
/// indices and returns the metric value (or an error, e.g. a class missing
/// from the resample, in which case that resample is skipped).
pub fn evaluate_with_ci<F>(
    n_rows: usize,
    metric: F,
    n_resamples: usize,
    level: f64,
    seed: u64,
) -> Result<(f64, f64, f64)>
where
    F: Fn(&[usize]) -> Result<f64>,
{
    let identity: Vec<usize> = (0..n_rows).collect();
    let point = metric(&identity)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stats = Vec::with_capacity(n_resamples);
    let mut idx = vec![0usize; n_rows];
    for _ in 0..n_resamples {
        for slot in idx.iter_mut() {
            *slot = rng.gen_range(0..n_rows);
        }
        if let Ok(v) = metric(&idx) {
            stats.push(v);
        }
    }
    if stats.is_empty() {
        return Ok((point, point, point));
    }
    stats.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let alpha = (1.0 - level) / 2.0;
    Ok((
        point,
        quantile_sorted(&stats, alpha),
        quantile_sorted(&stats, 1.0 - alpha),
    ))
}
