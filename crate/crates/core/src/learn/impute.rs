//! Missing-data handling. Imputation statistics and models are always fit
//! on the development set only; validation rows are left untouched by the
//! cohort imputers.

use super::cohort::{CohortRow, CohortTable, Factor, Split};
use super::hgb::{fit_hgb, HgbLoss, HgbParams};
use crate::{Error, Result};

/// Fill missing cells of `apply` with column means of the observed dev
/// cells. Columns with no observed dev value are an error.
pub fn mean_impute_features(
    dev: &[Vec<Option<f64>>],
    apply: &[Vec<Option<f64>>],
) -> Result<Vec<Vec<f64>>> {
    let cols = dev.first().map_or(0, |r| r.len());
    let mut means = vec![0.0f64; cols];
    for (j, m) in means.iter_mut().enumerate() {
        let vals: Vec<f64> = dev.iter().filter_map(|r| r[j]).collect();
        if vals.is_empty() {
            return Err(Error::AllMissingFeature(format!("column {j}")));
        }
        *m = vals.iter().sum::<f64>() / vals.len() as f64;
    }
    Ok(apply
        .iter()
        .map(|r| {
            r.iter()
                .enumerate()
                .map(|(j, v)| v.unwrap_or(means[j]))
                .collect()
        })
        .collect())
}

fn dev_rows(table: &CohortTable) -> Vec<usize> {
    table
        .rows
        .iter()
        .enumerate()
        .filter(|(_, r)| r.split == Some(Split::Dev))
        .map(|(i, _)| i)
        .collect()
}

/// k-nearest-neighbor imputation of a continuous factor over dev rows.
///
/// Distances run over the other continuous factors, z-scored with dev
/// statistics, restricted to co-observed entries, and scaled by
/// sqrt(D / d_obs) so sparsity does not shrink distances. Neighbors are
/// dev rows with the target observed; the imputed value is the mean of
/// the k nearest targets.
pub fn knn_impute_continuous(table: &CohortTable, k: usize) -> Result<CohortTable> {
    assert!(k >= 1);
    let mut out = table.clone();
    let dev = dev_rows(table);

    // dev z-score statistics per continuous factor
    let mut stats = [(0.0f64, 1.0f64); 6];
    for factor in Factor::CONTINUOUS {
        let vals: Vec<f64> = dev
            .iter()
            .filter_map(|&i| table.rows[i].continuous_value(factor))
            .collect();
        let bi = factor.block_index();
        if vals.is_empty() {
            stats[bi] = (0.0, 1.0);
            continue;
        }
        let m = vals.iter().sum::<f64>() / vals.len() as f64;
        let sd = (vals.iter().map(|v| (v - m) * (v - m)).sum::<f64>()
            / vals.len() as f64)
            .sqrt();
        stats[bi] = (m, if sd > 0.0 { sd } else { 1.0 });
    }
    let z = |row: &CohortRow, bi: usize| {
        row.continuous[bi].map(|v| (v - stats[bi].0) / stats[bi].1)
    };

    for target in Factor::CONTINUOUS {
        let ti = target.block_index();
        let pool: Vec<usize> = dev
            .iter()
            .copied()
            .filter(|&i| table.rows[i].continuous[ti].is_some())
            .collect();
        let missing: Vec<usize> = dev
            .iter()
            .copied()
            .filter(|&i| table.rows[i].continuous[ti].is_none())
            .collect();
        if missing.is_empty() {
            continue;
        }
        if pool.len() < k {
            return Err(Error::InsufficientNeighbors {
                needed: k,
                found: pool.len(),
            });
        }
        let feature_blocks: Vec<usize> = Factor::CONTINUOUS
            .iter()
            .map(|f| f.block_index())
            .filter(|&bi| bi != ti)
            .collect();
        let d_total = feature_blocks.len() as f64;
        for &mi in &missing {
            let row = &table.rows[mi];
            // (distance, pool index) for co-observed candidates
            let mut cands: Vec<(f64, usize)> = Vec::new();
            for &pi in &pool {
                let other = &table.rows[pi];
                let mut ss = 0.0;
                let mut d_obs = 0usize;
                for &bi in &feature_blocks {
                    if let (Some(a), Some(b)) = (z(row, bi), z(other, bi)) {
                        ss += (a - b) * (a - b);
                        d_obs += 1;
                    }
                }
                if d_obs > 0 {
                    cands.push(((d_total / d_obs as f64 * ss).sqrt(), pi));
                }
            }
            if cands.len() < k {
                return Err(Error::InsufficientNeighbors {
                    needed: k,
                    found: cands.len(),
                });
            }
            cands.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let value = cands[..k]
                .iter()
                .map(|&(_, pi)| table.rows[pi].continuous[ti].unwrap())
                .sum::<f64>()
                / k as f64;
            out.rows[mi].continuous[ti] = Some(value);
        }
    }
    Ok(out)
}

/// One-hot design matrix over the other eleven factors. Categorical
/// predictors get one column per level plus a missing indicator;
/// continuous predictors are dev-mean filled.
fn predictor_matrix(table: &CohortTable, rows: &[usize], target: Factor) -> Vec<Vec<f64>> {
    let dev = dev_rows(table);
    let mut cont_means = [0.0f64; 6];
    for factor in Factor::CONTINUOUS {
        let bi = factor.block_index();
        let vals: Vec<f64> = dev
            .iter()
            .filter_map(|&i| table.rows[i].continuous[bi])
            .collect();
        cont_means[bi] = if vals.is_empty() {
            0.0
        } else {
            vals.iter().sum::<f64>() / vals.len() as f64
        };
    }
    rows.iter()
        .map(|&i| {
            let row = &table.rows[i];
            let mut x = Vec::new();
            for factor in Factor::ALL {
                if factor == target {
                    continue;
                }
                if factor.is_categorical() {
                    let val = row.categorical[factor.block_index()];
                    for (li, _) in factor.levels().iter().enumerate() {
                        x.push((val == Some(li as u8)) as u8 as f64);
                    }
                    x.push(val.is_none() as u8 as f64);
                } else {
                    let bi = factor.block_index();
                    x.push(row.continuous[bi].unwrap_or(cont_means[bi]));
                }
            }
            x
        })
        .collect()
}

/// Gradient-boosted imputation of a categorical factor: the missing
/// variable is modeled from the remaining risk factors on dev rows with
/// the target observed, and missing dev cells take the argmax class.
pub fn boosted_impute_categorical(
    table: &CohortTable,
    target: Factor,
    params: &HgbParams,
) -> Result<CohortTable> {
    assert!(target.is_categorical());
    let ti = target.block_index();
    let mut out = table.clone();
    let dev = dev_rows(table);
    let train: Vec<usize> = dev
        .iter()
        .copied()
        .filter(|&i| table.rows[i].categorical[ti].is_some())
        .collect();
    let missing: Vec<usize> = dev
        .iter()
        .copied()
        .filter(|&i| table.rows[i].categorical[ti].is_none())
        .collect();
    if missing.is_empty() {
        return Ok(out);
    }
    let observed_levels: std::collections::BTreeSet<u8> = train
        .iter()
        .map(|&i| table.rows[i].categorical[ti].unwrap())
        .collect();
    if observed_levels.len() < 2 {
        return Err(Error::DegenerateTarget(format!(
            "factor {} has {} observed level(s) in dev",
            target.name(),
            observed_levels.len()
        )));
    }

    let x_train = predictor_matrix(table, &train, target);
    let y_train: Vec<f64> = train
        .iter()
        .map(|&i| table.rows[i].categorical[ti].unwrap() as f64)
        .collect();
    let n_classes = target.levels().len();
    let model = fit_hgb(&x_train, &y_train, params, HgbLoss::Softmax { n_classes })?;

    let x_missing = predictor_matrix(table, &missing, target);
    for (&mi, x) in missing.iter().zip(&x_missing) {
        let proba = model.predict_proba(x);
        let argmax = proba
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        out.rows[mi].categorical[ti] = Some(argmax as u8);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::Eye;

    fn row(id: &str, split: Split) -> CohortRow {
        CohortRow {
            subject_id: id.to_string(),
            eye: Eye::Left,
            categorical: [None; 6],
            continuous: [None; 6],
            split: Some(split),
        }
    }

    #[test]
    fn mean_impute_identity_when_complete() {
        let dev = vec![vec![Some(1.0), Some(2.0)], vec![Some(3.0), Some(4.0)]];
        let out = mean_impute_features(&dev, &dev).unwrap();
        assert_eq!(out, vec![vec![1.0, 2.0], vec![3.0, 4.0]]);
    }

    #[test]
    fn mean_impute_fills_with_dev_mean() {
        let dev = vec![vec![Some(2.0)], vec![Some(4.0)]];
        let apply = vec![vec![None], vec![Some(9.0)]];
        let out = mean_impute_features(&dev, &apply).unwrap();
        assert_eq!(out, vec![vec![3.0], vec![9.0]]);
    }

    #[test]
    fn mean_impute_all_missing_column_errors() {
        let dev = vec![vec![None], vec![None]];
        assert!(matches!(
            mean_impute_features(&dev, &dev),
            Err(Error::AllMissingFeature(_))
        ));
    }

    #[test]
    fn knn_imputes_with_neighbor_mean() {
        // age tracks bmi exactly; one dev row is missing age
        let mut rows = Vec::new();
        for i in 0..8 {
            let mut r = row(&format!("s{i}"), Split::Dev);
            r.continuous[2] = Some(20.0 + i as f64); // bmi
            r.continuous[0] = Some(40.0 + i as f64); // age
            rows.push(r);
        }
        rows[3].continuous[0] = None;
        let t = CohortTable { rows };
        let out = knn_impute_continuous(&t, 5).unwrap();
        let v = out.rows[3].continuous[0].unwrap();
        // neighbors cluster around bmi = 23, so the mean stays near 43
        assert!((v - 43.0).abs() <= 1.0, "got {v}");
        // no other cell changed
        assert_eq!(out.rows[2].continuous[0], Some(42.0));
    }

    #[test]
    fn knn_leaves_val_rows_untouched() {
        let mut rows = Vec::new();
        for i in 0..6 {
            let mut r = row(&format!("s{i}"), Split::Dev);
            r.continuous[2] = Some(25.0 + i as f64);
            r.continuous[0] = Some(50.0 + i as f64);
            rows.push(r);
        }
        let mut vrow = row("v0", Split::Val);
        vrow.continuous[2] = Some(27.0);
        vrow.continuous[0] = None; // stays missing
        rows.push(vrow);
        let t = CohortTable { rows };
        let out = knn_impute_continuous(&t, 5).unwrap();
        assert_eq!(out.rows[6].continuous[0], None);
    }

    #[test]
    fn knn_insufficient_pool_errors() {
        let mut rows = vec![row("a", Split::Dev), row("b", Split::Dev)];
        rows[0].continuous[0] = None;
        rows[0].continuous[2] = Some(25.0);
        rows[1].continuous[0] = Some(44.0);
        rows[1].continuous[2] = Some(26.0);
        let t = CohortTable { rows };
        assert!(matches!(
            knn_impute_continuous(&t, 5),
            Err(Error::InsufficientNeighbors { .. })
        ));
    }

    #[test]
    fn boosted_imputer_recovers_planted_rule() {
        // smoking == smoked exactly when alcohol == excessive
        let mut rows = Vec::new();
        for i in 0..120 {
            let mut r = row(&format!("s{i}"), Split::Dev);
            let alcohol = (i % 3) as u8;
            r.categorical[3] = Some(alcohol);
            r.categorical[2] = Some((alcohol == 2) as u8);
            r.continuous[0] = Some(40.0 + (i % 17) as f64);
            rows.push(r);
        }
        // knock out 20 smoking cells
        for i in (0..120).step_by(6) {
            rows[i].categorical[2] = None;
        }
        let t = CohortTable { rows };
        let out =
            boosted_impute_categorical(&t, Factor::Smoking, &HgbParams::default()).unwrap();
        let mut correct = 0;
        let mut total = 0;
        for i in (0..120).step_by(6) {
            total += 1;
            let want = (t.rows[i].categorical[3] == Some(2)) as u8;
            if out.rows[i].categorical[2] == Some(want) {
                correct += 1;
            }
        }
        assert!(correct as f64 / total as f64 >= 0.95, "{correct}/{total}");
    }

    #[test]
    fn boosted_single_level_degenerate() {
        let mut rows = Vec::new();
        for i in 0..10 {
            let mut r = row(&format!("s{i}"), Split::Dev);
            r.categorical[2] = if i < 5 { Some(0) } else { None };
            rows.push(r);
        }
        let t = CohortTable { rows };
        assert!(matches!(
            boosted_impute_categorical(&t, Factor::Smoking, &HgbParams::default()),
            Err(Error::DegenerateTarget(_))
        ));
    }

    #[test]
    fn boosted_no_missing_is_identity() {
        let mut rows = Vec::new();
        for i in 0..10 {
            let mut r = row(&format!("s{i}"), Split::Dev);
            r.categorical[2] = Some((i % 2) as u8);
            rows.push(r);
        }
        let t = CohortTable { rows: rows.clone() };
        let out =
            boosted_impute_categorical(&t, Factor::Smoking, &HgbParams::default()).unwrap();
        assert_eq!(
            serde_json::to_string(&out).unwrap(),
            serde_json::to_string(&CohortTable { rows }).unwrap()
        );
    }
}
