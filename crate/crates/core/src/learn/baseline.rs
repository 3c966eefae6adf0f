//! Morphometry-based baseline models: linear/logistic regression and
//! gradient boosting per risk factor, grid-searched on the development
//! set and reported on the validation set with bootstrap CIs.

use super::cohort::{CohortTable, Factor, Split};
use super::hgb::{fit_hgb, HgbLoss, HgbModel, HgbParams};
use super::impute::mean_impute_features;
use super::linear::fit_linear_ridge;
use super::logistic::{fit_logistic, inverse_frequency_weights};
use super::metrics::{auroc_multiclass, balanced_accuracy, evaluate_with_ci, r2};
use super::split::kfold;
use crate::morphometry::FeatureTable;
use crate::raster::Eye;
use crate::util::derive_seed;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

#[derive(Debug, Clone)]
pub struct BaselineConfig {
    pub bootstrap_resamples: usize,
    pub seed: u64,
    pub inner_folds: usize,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        Self {
            bootstrap_resamples: 2000,
            seed: 42,
            inner_folds: 5,
        }
    }
}

/// The hyperparameter grid explored for every gradient-boosted task.
pub fn hgb_grid() -> Vec<HgbParams> {
    let mut grid = Vec::new();
    for depth in [3, 6] {
        for lr in [0.05, 0.1] {
            for trees in [100, 300] {
                grid.push(HgbParams {
                    max_depth: depth,
                    learning_rate: lr,
                    n_trees: trees,
                    ..Default::default()
                });
            }
        }
    }
    grid
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelReport {
    pub factor: String,
    pub model: String,
    pub metric: String,
    pub value: Option<f64>,
    pub ci_lo: Option<f64>,
    pub ci_hi: Option<f64>,
    pub chance: f64,
    pub n_val: usize,
    pub note: String,
}

impl ModelReport {
    pub fn csv_header() -> [&'static str; 9] {
        [
            "factor", "model", "metric", "value", "ci_lo", "ci_hi", "chance", "n_val", "note",
        ]
    }

    pub fn csv_row(&self) -> Vec<String> {
        let f = |v: Option<f64>| v.map(|x| format!("{x}")).unwrap_or_default();
        vec![
            self.factor.clone(),
            self.model.clone(),
            self.metric.clone(),
            f(self.value),
            f(self.ci_lo),
            f(self.ci_hi),
            format!("{}", self.chance),
            format!("{}", self.n_val),
            self.note.clone(),
        ]
    }
}

struct JoinedData {
    /// dev design rows (mean-imputed), aligned with `dev_rows` of cohort.
    x_dev: Vec<Vec<f64>>,
    x_val: Vec<Vec<f64>>,
    dev_rows: Vec<usize>,
    val_rows: Vec<usize>,
    dev_subjects: Vec<String>,
}

fn join(cohort: &CohortTable, features: &FeatureTable) -> Result<JoinedData> {
    let feature_row: HashMap<(String, Eye), usize> = features
        .keys
        .iter()
        .enumerate()
        .map(|(i, k)| (k.clone(), i))
        .collect();
    let mut dev_rows = Vec::new();
    let mut val_rows = Vec::new();
    let mut x_dev_opt = Vec::new();
    let mut x_val_opt = Vec::new();
    for (i, row) in cohort.rows.iter().enumerate() {
        let Some(&fi) = feature_row.get(&(row.subject_id.clone(), row.eye)) else {
            continue;
        };
        match row.split {
            Some(Split::Dev) => {
                dev_rows.push(i);
                x_dev_opt.push(features.values[fi].clone());
            }
            Some(Split::Val) => {
                val_rows.push(i);
                x_val_opt.push(features.values[fi].clone());
            }
            None => {}
        }
    }
    if dev_rows.is_empty() || val_rows.is_empty() {
        return Err(Error::InvalidInput(
            "baseline needs dev and val rows joined to features".into(),
        ));
    }
    let x_dev = mean_impute_features(&x_dev_opt, &x_dev_opt)?;
    let x_val = mean_impute_features(&x_dev_opt, &x_val_opt)?;
    let dev_subjects = dev_rows
        .iter()
        .map(|&i| cohort.rows[i].subject_id.clone())
        .collect();
    Ok(JoinedData {
        x_dev,
        x_val,
        dev_rows,
        val_rows,
        dev_subjects,
    })
}

fn zscore(train: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let d = train[0].len();
    let n = train.len() as f64;
    let means: Vec<f64> = (0..d)
        .map(|j| train.iter().map(|r| r[j]).sum::<f64>() / n)
        .collect();
    let sds: Vec<f64> = (0..d)
        .map(|j| {
            let ss: f64 = train.iter().map(|r| (r[j] - means[j]).powi(2)).sum();
            let sd = (ss / n).sqrt();
            if sd > 0.0 {
                sd
            } else {
                1.0
            }
        })
        .collect();
    (means, sds)
}

fn apply_z(x: &[Vec<f64>], means: &[f64], sds: &[f64]) -> Vec<Vec<f64>> {
    x.iter()
        .map(|r| {
            r.iter()
                .enumerate()
                .map(|(j, v)| (v - means[j]) / sds[j])
                .collect()
        })
        .collect()
}

/// Inner-CV mean balanced accuracy of an HGB configuration.
fn hgb_cv_score(
    x: &[Vec<f64>],
    y: &[f64],
    subjects: &[String],
    loss: HgbLoss,
    params: &HgbParams,
    folds: usize,
    seed: u64,
) -> Result<f64> {
    let assign = kfold(&subjects.to_vec(), folds, seed);
    let mut scores = Vec::new();
    for fold in 0..folds {
        let train: Vec<usize> = (0..x.len()).filter(|&i| assign[i] != fold).collect();
        let test: Vec<usize> = (0..x.len()).filter(|&i| assign[i] == fold).collect();
        if train.len() < 2 || test.is_empty() {
            continue;
        }
        let xt: Vec<Vec<f64>> = train.iter().map(|&i| x[i].clone()).collect();
        let yt: Vec<f64> = train.iter().map(|&i| y[i]).collect();
        let model = match fit_hgb(&xt, &yt, params, loss) {
            Ok(m) => m,
            Err(_) => continue,
        };
        let score = match loss {
            HgbLoss::Squared => {
                let pred: Vec<f64> = test.iter().map(|&i| model.predict(&x[i])).collect();
                let truth: Vec<f64> = test.iter().map(|&i| y[i]).collect();
                r2(&pred, &truth)
            }
            HgbLoss::Softmax { .. } => {
                let pred: Vec<usize> = test.iter().map(|&i| model.predict_class(&x[i])).collect();
                let truth: Vec<usize> = test.iter().map(|&i| y[i] as usize).collect();
                balanced_accuracy(&pred, &truth)
            }
        };
        if let Ok(s) = score {
            scores.push(s);
        }
    }
    if scores.is_empty() {
        return Err(Error::DegenerateTarget("no valid inner folds".into()));
    }
    Ok(scores.iter().sum::<f64>() / scores.len() as f64)
}

fn grid_search_hgb(
    x: &[Vec<f64>],
    y: &[f64],
    subjects: &[String],
    loss: HgbLoss,
    folds: usize,
    seed: u64,
) -> Result<(HgbModel, HgbParams)> {
    let mut best: Option<(f64, HgbParams)> = None;
    for params in hgb_grid() {
        let score = match hgb_cv_score(x, y, subjects, loss, &params, folds, seed) {
            Ok(s) => s,
            Err(_) => continue,
        };
        if best.as_ref().map_or(true, |(b, _)| score > *b) {
            best = Some((score, params));
        }
    }
    let (_, params) = best.ok_or_else(|| {
        Error::DegenerateTarget("grid search found no fittable configuration".into())
    })?;
    let model = fit_hgb(x, y, &params, loss)?;
    Ok((model, params))
}

/// Train and evaluate LR and HGB for every factor. One report row per
/// (factor, model, metric); failures surface as rows with a note.
pub fn run_baseline(
    cohort: &CohortTable,
    features: &FeatureTable,
    cfg: &BaselineConfig,
) -> Result<Vec<ModelReport>> {
    let data = join(cohort, features)?;
    let (means, sds) = zscore(&data.x_dev);
    let xz_dev = apply_z(&data.x_dev, &means, &sds);
    let xz_val = apply_z(&data.x_val, &means, &sds);

    let mut reports = Vec::new();
    for factor in Factor::ALL {
        if factor.is_categorical() {
            reports.extend(categorical_reports(
                cohort, &data, &xz_dev, &xz_val, factor, cfg,
            ));
        } else {
            reports.extend(continuous_reports(
                cohort, &data, &xz_dev, &xz_val, factor, cfg,
            ));
        }
    }
    Ok(reports)
}

fn failed_report(factor: Factor, model: &str, metric: &str, chance: f64, e: &Error) -> ModelReport {
    ModelReport {
        factor: factor.name().to_string(),
        model: model.to_string(),
        metric: metric.to_string(),
        value: None,
        ci_lo: None,
        ci_hi: None,
        chance,
        n_val: 0,
        note: e.to_string(),
    }
}

#[allow(clippy::too_many_arguments)]
fn classification_report_rows(
    factor: Factor,
    model_name: &str,
    proba_val: &[Vec<f64>],
    truth_val: &[usize],
    n_classes: usize,
    cfg: &BaselineConfig,
    note: &str,
) -> Vec<ModelReport> {
    let mut out = Vec::new();
    let pred_val: Vec<usize> = proba_val
        .iter()
        .map(|p| {
            p.iter()
                .enumerate()
                .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                .unwrap()
                .0
        })
        .collect();
    let chance_acc = 1.0 / n_classes as f64;
    let acc_seed = derive_seed(cfg.seed, &format!("{}/{model_name}/bacc", factor.name()));
    let acc = evaluate_with_ci(
        truth_val.len(),
        |idx| {
            let p: Vec<usize> = idx.iter().map(|&i| pred_val[i]).collect();
            let t: Vec<usize> = idx.iter().map(|&i| truth_val[i]).collect();
            balanced_accuracy(&p, &t)
        },
        cfg.bootstrap_resamples,
        0.95,
        acc_seed,
    );
    out.push(match acc {
        Ok((v, lo, hi)) => ModelReport {
            factor: factor.name().to_string(),
            model: model_name.to_string(),
            metric: "balanced_accuracy".to_string(),
            value: Some(v),
            ci_lo: Some(lo),
            ci_hi: Some(hi),
            chance: chance_acc,
            n_val: truth_val.len(),
            note: note.to_string(),
        },
        Err(e) => failed_report(factor, model_name, "balanced_accuracy", chance_acc, &e),
    });
    let auroc_seed = derive_seed(cfg.seed, &format!("{}/{model_name}/auroc", factor.name()));
    let au = evaluate_with_ci(
        truth_val.len(),
        |idx| {
            let p: Vec<Vec<f64>> = idx.iter().map(|&i| proba_val[i].clone()).collect();
            let t: Vec<usize> = idx.iter().map(|&i| truth_val[i]).collect();
            auroc_multiclass(&p, &t, n_classes)
        },
        cfg.bootstrap_resamples,
        0.95,
        auroc_seed,
    );
    out.push(match au {
        Ok((v, lo, hi)) => ModelReport {
            factor: factor.name().to_string(),
            model: model_name.to_string(),
            metric: "auroc".to_string(),
            value: Some(v),
            ci_lo: Some(lo),
            ci_hi: Some(hi),
            chance: 0.5,
            n_val: truth_val.len(),
            note: note.to_string(),
        },
        Err(e) => failed_report(factor, model_name, "auroc", 0.5, &e),
    });
    out
}

fn categorical_reports(
    cohort: &CohortTable,
    data: &JoinedData,
    xz_dev: &[Vec<f64>],
    xz_val: &[Vec<f64>],
    factor: Factor,
    cfg: &BaselineConfig,
) -> Vec<ModelReport> {
    let n_classes = factor.levels().len();
    let chance = 1.0 / n_classes as f64;
    // rows with an observed target; missing val targets are excluded
    let dev_ok: Vec<usize> = (0..data.dev_rows.len())
        .filter(|&i| {
            cohort.rows[data.dev_rows[i]]
                .categorical_value(factor)
                .is_some()
        })
        .collect();
    let val_ok: Vec<usize> = (0..data.val_rows.len())
        .filter(|&i| {
            cohort.rows[data.val_rows[i]]
                .categorical_value(factor)
                .is_some()
        })
        .collect();
    if dev_ok.len() < 4 || val_ok.is_empty() {
        let e = Error::DegenerateTarget(format!("factor {}: too few rows", factor.name()));
        return vec![
            failed_report(factor, "LR", "balanced_accuracy", chance, &e),
            failed_report(factor, "HGB", "balanced_accuracy", chance, &e),
        ];
    }
    let y_dev: Vec<usize> = dev_ok
        .iter()
        .map(|&i| cohort.rows[data.dev_rows[i]].categorical_value(factor).unwrap() as usize)
        .collect();
    let y_val: Vec<usize> = val_ok
        .iter()
        .map(|&i| cohort.rows[data.val_rows[i]].categorical_value(factor).unwrap() as usize)
        .collect();
    let xd: Vec<Vec<f64>> = dev_ok.iter().map(|&i| xz_dev[i].clone()).collect();
    let xv: Vec<Vec<f64>> = val_ok.iter().map(|&i| xz_val[i].clone()).collect();
    let subjects: Vec<String> = dev_ok
        .iter()
        .map(|&i| cohort.rows[data.dev_rows[i]].subject_id.clone())
        .collect();

    let mut out = Vec::new();
    // logistic regression
    match fit_logistic(&xd, &y_dev, n_classes, &inverse_frequency_weights(&y_dev, n_classes)) {
        Ok(model) => {
            let proba: Vec<Vec<f64>> = xv.iter().map(|x| model.predict_proba(x)).collect();
            let note = if model.converged { "" } else { "non_convergence" };
            out.extend(classification_report_rows(
                factor, "LR", &proba, &y_val, n_classes, cfg, note,
            ));
        }
        Err(e) => {
            out.push(failed_report(factor, "LR", "balanced_accuracy", chance, &e));
            out.push(failed_report(factor, "LR", "auroc", 0.5, &e));
        }
    }
    // gradient boosting (raw features; scaling-invariant)
    let xd_raw: Vec<Vec<f64>> = dev_ok.iter().map(|&i| data.x_dev[i].clone()).collect();
    let xv_raw: Vec<Vec<f64>> = val_ok.iter().map(|&i| data.x_val[i].clone()).collect();
    let y_dev_f: Vec<f64> = y_dev.iter().map(|&c| c as f64).collect();
    let gs_seed = derive_seed(cfg.seed, &format!("{}/hgb_grid", factor.name()));
    match grid_search_hgb(
        &xd_raw,
        &y_dev_f,
        &subjects,
        HgbLoss::Softmax { n_classes },
        cfg.inner_folds,
        gs_seed,
    ) {
        Ok((model, params)) => {
            let proba: Vec<Vec<f64>> = xv_raw.iter().map(|x| model.predict_proba(x)).collect();
            let note = format!(
                "depth={} lr={} trees={}",
                params.max_depth, params.learning_rate, params.n_trees
            );
            out.extend(classification_report_rows(
                factor, "HGB", &proba, &y_val, n_classes, cfg, &note,
            ));
        }
        Err(e) => {
            out.push(failed_report(factor, "HGB", "balanced_accuracy", chance, &e));
            out.push(failed_report(factor, "HGB", "auroc", 0.5, &e));
        }
    }
    out
}

fn continuous_reports(
    cohort: &CohortTable,
    data: &JoinedData,
    xz_dev: &[Vec<f64>],
    xz_val: &[Vec<f64>],
    factor: Factor,
    cfg: &BaselineConfig,
) -> Vec<ModelReport> {
    let dev_ok: Vec<usize> = (0..data.dev_rows.len())
        .filter(|&i| {
            cohort.rows[data.dev_rows[i]]
                .continuous_value(factor)
                .is_some()
        })
        .collect();
    let val_ok: Vec<usize> = (0..data.val_rows.len())
        .filter(|&i| {
            cohort.rows[data.val_rows[i]]
                .continuous_value(factor)
                .is_some()
        })
        .collect();
    if dev_ok.len() < 4 || val_ok.len() < 2 {
        let e = Error::DegenerateTarget(format!("factor {}: too few rows", factor.name()));
        return vec![
            failed_report(factor, "LR", "r2", 0.0, &e),
            failed_report(factor, "HGB", "r2", 0.0, &e),
        ];
    }
    let y_dev: Vec<f64> = dev_ok
        .iter()
        .map(|&i| cohort.rows[data.dev_rows[i]].continuous_value(factor).unwrap())
        .collect();
    let y_val: Vec<f64> = val_ok
        .iter()
        .map(|&i| cohort.rows[data.val_rows[i]].continuous_value(factor).unwrap())
        .collect();
    let xd: Vec<Vec<f64>> = dev_ok.iter().map(|&i| xz_dev[i].clone()).collect();
    let xv: Vec<Vec<f64>> = val_ok.iter().map(|&i| xz_val[i].clone()).collect();
    let subjects: Vec<String> = dev_ok
        .iter()
        .map(|&i| cohort.rows[data.dev_rows[i]].subject_id.clone())
        .collect();

    let mut out = Vec::new();
    let report_r2 = |model_name: &str, pred_val: Vec<f64>, note: String| -> ModelReport {
        let seed = derive_seed(cfg.seed, &format!("{}/{model_name}/r2", factor.name()));
        match evaluate_with_ci(
            y_val.len(),
            |idx| {
                let p: Vec<f64> = idx.iter().map(|&i| pred_val[i]).collect();
                let t: Vec<f64> = idx.iter().map(|&i| y_val[i]).collect();
                r2(&p, &t)
            },
            cfg.bootstrap_resamples,
            0.95,
            seed,
        ) {
            Ok((v, lo, hi)) => ModelReport {
                factor: factor.name().to_string(),
                model: model_name.to_string(),
                metric: "r2".to_string(),
                value: Some(v),
                ci_lo: Some(lo),
                ci_hi: Some(hi),
                chance: 0.0,
                n_val: y_val.len(),
                note,
            },
            Err(e) => failed_report(factor, model_name, "r2", 0.0, &e),
        }
    };

    match fit_linear_ridge(&xd, &y_dev, 0.0)
        .or_else(|_| fit_linear_ridge(&xd, &y_dev, 1e-8))
    {
        Ok(model) => {
            let pred: Vec<f64> = xv.iter().map(|x| model.predict(x)).collect();
            out.push(report_r2("LR", pred, String::new()));
        }
        Err(e) => out.push(failed_report(factor, "LR", "r2", 0.0, &e)),
    }

    let xd_raw: Vec<Vec<f64>> = dev_ok.iter().map(|&i| data.x_dev[i].clone()).collect();
    let xv_raw: Vec<Vec<f64>> = val_ok.iter().map(|&i| data.x_val[i].clone()).collect();
    let gs_seed = derive_seed(cfg.seed, &format!("{}/hgb_grid", factor.name()));
    match grid_search_hgb(
        &xd_raw,
        &y_dev,
        &subjects,
        HgbLoss::Squared,
        cfg.inner_folds,
        gs_seed,
    ) {
        Ok((model, params)) => {
            let pred: Vec<f64> = xv_raw.iter().map(|x| model.predict(x)).collect();
            let note = format!(
                "depth={} lr={} trees={}",
                params.max_depth, params.learning_rate, params.n_trees
            );
            out.push(report_r2("HGB", pred, note));
        }
        Err(e) => out.push(failed_report(factor, "HGB", "r2", 0.0, &e)),
    }
    out
}

/// Externally produced predictions, one row per (subject, eye) and factor.
#[derive(Debug, Clone)]
pub enum ImportedPrediction {
    Categorical {
        factor: Factor,
        truth: usize,
        scores: Vec<f64>,
    },
    Continuous {
        factor: Factor,
        truth: f64,
        pred: f64,
    },
}

/// Score imported predictions in the same report format (model tag
/// `DL-import`).
pub fn evaluate_imported(
    preds: &[ImportedPrediction],
    cfg: &BaselineConfig,
) -> Vec<ModelReport> {
    let mut out = Vec::new();
    for factor in Factor::ALL {
        if factor.is_categorical() {
            let rows: Vec<(&Vec<f64>, usize)> = preds
                .iter()
                .filter_map(|p| match p {
                    ImportedPrediction::Categorical {
                        factor: f,
                        truth,
                        scores,
                    } if *f == factor => Some((scores, *truth)),
                    _ => None,
                })
                .collect();
            if rows.is_empty() {
                continue;
            }
            let proba: Vec<Vec<f64>> = rows.iter().map(|(s, _)| (*s).clone()).collect();
            let truth: Vec<usize> = rows.iter().map(|(_, t)| *t).collect();
            out.extend(classification_report_rows(
                factor,
                "DL-import",
                &proba,
                &truth,
                factor.levels().len(),
                cfg,
                "",
            ));
        } else {
            let rows: Vec<(f64, f64)> = preds
                .iter()
                .filter_map(|p| match p {
                    ImportedPrediction::Continuous {
                        factor: f,
                        truth,
                        pred,
                    } if *f == factor => Some((*pred, *truth)),
                    _ => None,
                })
                .collect();
            if rows.is_empty() {
                continue;
            }
            let pred: Vec<f64> = rows.iter().map(|(p, _)| *p).collect();
            let truth: Vec<f64> = rows.iter().map(|(_, t)| *t).collect();
            let seed = derive_seed(cfg.seed, &format!("{}/DL-import/r2", factor.name()));
            let rep = match evaluate_with_ci(
                truth.len(),
                |idx| {
                    let p: Vec<f64> = idx.iter().map(|&i| pred[i]).collect();
                    let t: Vec<f64> = idx.iter().map(|&i| truth[i]).collect();
                    r2(&p, &t)
                },
                cfg.bootstrap_resamples,
                0.95,
                seed,
            ) {
                Ok((v, lo, hi)) => ModelReport {
                    factor: factor.name().to_string(),
                    model: "DL-import".to_string(),
                    metric: "r2".to_string(),
                    value: Some(v),
                    ci_lo: Some(lo),
                    ci_hi: Some(hi),
                    chance: 0.0,
                    n_val: truth.len(),
                    note: String::new(),
                },
                Err(e) => failed_report(factor, "DL-import", "r2", 0.0, &e),
            };
            out.push(rep);
        }
    }
    out
}
