//! Linear probing of deep-feature embeddings: how well does a ridge model
//! on frozen embeddings predict each morphometry feature?

use super::linear::RidgeSolver;
use super::metrics::r2;
use super::split::kfold;
use crate::morphometry::{FeatureTable, Zone, BASE_FEATURES};
use crate::raster::Eye;
use crate::util::{mean, sample_sd};
use crate::{Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};
use std::collections::HashMap;
use std::io::Read;
use std::path::Path;

pub const EMBEDDING_DIM: usize = 1536;

/// Which trained network the embeddings came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmbeddingSource {
    Classification,
    Regression,
}

impl EmbeddingSource {
    pub const BOTH: [EmbeddingSource; 2] =
        [EmbeddingSource::Classification, EmbeddingSource::Regression];

    pub fn name(self) -> &'static str {
        match self {
            EmbeddingSource::Classification => "classification",
            EmbeddingSource::Regression => "regression",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "classification" => Ok(EmbeddingSource::Classification),
            "regression" => Ok(EmbeddingSource::Regression),
            other => Err(Error::InvalidInput(format!("unknown source '{other}'"))),
        }
    }
}

/// Row-major embedding rows keyed by (subject, eye), one source per matrix.
#[derive(Debug, Clone)]
pub struct EmbeddingMatrix {
    pub source: EmbeddingSource,
    pub keys: Vec<(String, Eye)>,
    pub dim: usize,
    pub data: Vec<f64>,
}

impl EmbeddingMatrix {
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    /// Read `subject_id,eye,source,e0..eN` rows, one matrix per source.
    pub fn read_csv(path: &Path) -> Result<Vec<EmbeddingMatrix>> {
        Self::from_reader(std::fs::File::open(path)?)
    }

    pub fn from_reader<R: Read>(reader: R) -> Result<Vec<EmbeddingMatrix>> {
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.len() < 4
            || &headers[0] != "subject_id"
            || &headers[1] != "eye"
            || &headers[2] != "source"
        {
            return Err(Error::InvalidInput(
                "embeddings header must start subject_id,eye,source,e0..".into(),
            ));
        }
        let dim = headers.len() - 3;
        let mut by_source: HashMap<EmbeddingSource, (Vec<(String, Eye)>, Vec<f64>)> =
            HashMap::new();
        for record in rdr.records() {
            let record = record?;
            let source = EmbeddingSource::parse(record.get(2).unwrap_or(""))?;
            let entry = by_source.entry(source).or_default();
            entry.0.push((
                record.get(0).unwrap_or("").to_string(),
                Eye::parse(record.get(1).unwrap_or(""))?,
            ));
            for i in 0..dim {
                let v: f64 = record
                    .get(3 + i)
                    .unwrap_or("")
                    .parse()
                    .map_err(|_| Error::InvalidInput("bad embedding value".into()))?;
                entry.1.push(v);
            }
        }
        let mut out: Vec<EmbeddingMatrix> = by_source
            .into_iter()
            .map(|(source, (keys, data))| EmbeddingMatrix {
                source,
                keys,
                dim,
                data,
            })
            .collect();
        out.sort_by_key(|m| m.source);
        Ok(out)
    }
}

/// One probe result: out-of-fold R-squared summary for a (feature, zone,
/// source) target.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProbeRow {
    pub feature: String,
    pub zone: Zone,
    pub source: EmbeddingSource,
    pub r2_mean: f64,
    pub r2_sd: f64,
    pub r2_ci_lo: f64,
    pub r2_ci_hi: f64,
    pub n_folds: usize,
    pub n_rows: usize,
}

/// Ridge strength relative to the mean Gram diagonal; embeddings are
/// high-dimensional relative to cohort size, so shrinkage is required for
/// stable folds.
pub const PROBE_LAMBDA_SCALE: f64 = 1e-3;

/// Probe every (feature, zone) target with k-fold ridge regression and
/// report mean, sd, and a 95% t-interval of out-of-fold R-squared.
///
/// Only complete rows participate: an embedding row counts when its
/// feature row carries every one of the 24 features in both zones,
/// matching the complete-case selection of the probe cohort. One row per
/// 24 features x 2 zones is emitted for the given source.
pub fn linear_probe(
    embeddings: &EmbeddingMatrix,
    features: &FeatureTable,
    k: usize,
    seed: u64,
) -> Result<Vec<ProbeRow>> {
    let feature_row: HashMap<(String, Eye), usize> = features
        .keys
        .iter()
        .enumerate()
        .map(|(i, k)| (k.clone(), i))
        .collect();
    let complete = |row: usize| features.values[row].iter().all(|v| v.is_some());
    let aligned: Vec<usize> = (0..embeddings.keys.len())
        .filter(|&i| {
            feature_row
                .get(&embeddings.keys[i])
                .is_some_and(|&r| complete(r))
        })
        .collect();
    if aligned.len() < k * 2 {
        return Err(Error::InvalidInput(format!(
            "only {} complete aligned rows for {k}-fold probe",
            aligned.len()
        )));
    }
    let subjects: Vec<String> = aligned
        .iter()
        .map(|&i| embeddings.keys[i].0.clone())
        .collect();
    let folds = kfold(&subjects, k, seed);

    // per fold: one ridge factorization shared by all 48 targets
    let fold_models: Vec<Result<(RidgeSolver, Vec<usize>, Vec<usize>)>> = (0..k)
        .into_par_iter()
        .map(|fold| {
            let train: Vec<usize> = (0..aligned.len()).filter(|&r| folds[r] != fold).collect();
            let test: Vec<usize> = (0..aligned.len()).filter(|&r| folds[r] == fold).collect();
            let x_train: Vec<Vec<f64>> = train
                .iter()
                .map(|&r| embeddings.row(aligned[r]).to_vec())
                .collect();
            let solver = RidgeSolver::new(&x_train, PROBE_LAMBDA_SCALE)?;
            Ok((solver, train, test))
        })
        .collect();
    let mut solvers = Vec::with_capacity(k);
    for fm in fold_models {
        solvers.push(fm?);
    }

    let targets: Vec<(usize, Zone)> = (0..BASE_FEATURES.len())
        .flat_map(|f| Zone::BOTH.into_iter().map(move |z| (f, z)))
        .collect();
    let rows: Vec<ProbeRow> = targets
        .par_iter()
        .map(|&(fi, zone)| {
            let feature = BASE_FEATURES[fi];
            let y: Vec<f64> = aligned
                .iter()
                .map(|&i| {
                    features
                        .value(feature_row[&embeddings.keys[i]], feature, zone)
                        .unwrap()
                })
                .collect();
            let mut fold_r2 = Vec::with_capacity(k);
            for (solver, train, test) in &solvers {
                let ty: Vec<f64> = train.iter().map(|&r| y[r]).collect();
                let model = solver.solve(&ty);
                let truth: Vec<f64> = test.iter().map(|&r| y[r]).collect();
                let pred: Vec<f64> = test
                    .iter()
                    .map(|&r| model.predict(embeddings.row(aligned[r])))
                    .collect();
                if let Ok(v) = r2(&pred, &truth) {
                    fold_r2.push(v);
                }
            }
            let m = if fold_r2.is_empty() { f64::NAN } else { mean(&fold_r2) };
            let sd = sample_sd(&fold_r2);
            let half = if fold_r2.len() >= 2 {
                let t = StudentsT::new(0.0, 1.0, (fold_r2.len() - 1) as f64)
                    .unwrap()
                    .inverse_cdf(0.975);
                t * sd / (fold_r2.len() as f64).sqrt()
            } else {
                0.0
            };
            ProbeRow {
                feature: feature.to_string(),
                zone,
                source: embeddings.source,
                r2_mean: m,
                r2_sd: sd,
                r2_ci_lo: m - half,
                r2_ci_hi: m + half,
                n_folds: fold_r2.len(),
                n_rows: aligned.len(),
            }
        })
        .collect();
    Ok(rows)
}
