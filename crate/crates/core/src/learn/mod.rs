//! Classical machine-learning layer: cohort handling, splitting,
//! imputation, baseline models, evaluation metrics, and linear probing of
//! deep-feature embeddings.

mod baseline;
mod cohort;
mod hgb;
mod impute;
mod linear;
mod logistic;
mod metrics;
mod probe;
mod split;

pub use baseline::{
    evaluate_imported, hgb_grid, run_baseline, BaselineConfig, ImportedPrediction, ModelReport,
};
pub use cohort::{CohortRow, CohortTable, Factor, Split};
pub use hgb::{fit_hgb, HgbLoss, HgbModel, HgbParams};
pub use impute::{boosted_impute_categorical, knn_impute_continuous, mean_impute_features};
pub use linear::{fit_linear_ridge, LinearModel, RidgeSolver};
pub use logistic::{fit_logistic, inverse_frequency_weights, LogisticModel};
pub use metrics::{auroc, auroc_multiclass, balanced_accuracy, evaluate_with_ci, r2};
pub use probe::{
    linear_probe, EmbeddingMatrix, EmbeddingSource, ProbeRow, EMBEDDING_DIM, PROBE_LAMBDA_SCALE,
};
pub use split::{kfold, stratified_split};
