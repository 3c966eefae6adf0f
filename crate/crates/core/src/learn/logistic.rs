//! Multinomial logistic regression fit by damped Newton iterations with a
//! small L2 ridge. Class weights counter imbalance; non-convergence is
//! reported on the model rather than raised.

use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};

const RIDGE: f64 = 1e-6;
const GRAD_TOL: f64 = 1e-6;
const MAX_ITER: usize = 100;

#[derive(Debug, Clone)]
pub struct LogisticModel {
    /// Per class, the bias followed by feature weights.
    pub weights: Vec<Vec<f64>>,
    pub n_classes: usize,
    pub converged: bool,
    pub iterations: usize,
}

impl LogisticModel {
    pub fn predict_proba(&self, x: &[f64]) -> Vec<f64> {
        let raw: Vec<f64> = self
            .weights
            .iter()
            .map(|w| w[0] + x.iter().zip(&w[1..]).map(|(a, b)| a * b).sum::<f64>())
            .collect();
        let m = raw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = raw.iter().map(|s| (s - m).exp()).collect();
        let z: f64 = exps.iter().sum();
        exps.into_iter().map(|e| e / z).collect()
    }

    pub fn predict_class(&self, x: &[f64]) -> usize {
        self.predict_proba(x)
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0
    }
}

/// Inverse-frequency class weights normalized to mean one.
pub fn inverse_frequency_weights(labels: &[usize], n_classes: usize) -> Vec<f64> {
    let mut counts = vec![0usize; n_classes];
    for &l in labels {
        counts[l] += 1;
    }
    let n = labels.len() as f64;
    counts
        .iter()
        .map(|&c| if c == 0 { 0.0 } else { n / (n_classes as f64 * c as f64) })
        .collect()
}

fn weighted_nll(
    x: &[Vec<f64>],
    y: &[usize],
    sample_w: &[f64],
    flat: &DVector<f64>,
    k: usize,
    p: usize,
) -> f64 {
    let mut nll = 0.0;
    for (i, xi) in x.iter().enumerate() {
        let mut raw = vec![0.0; k];
        for (c, r) in raw.iter_mut().enumerate() {
            let base = c * p;
            *r = flat[base] + xi.iter().enumerate().map(|(j, v)| v * flat[base + 1 + j]).sum::<f64>();
        }
        let m = raw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let z: f64 = raw.iter().map(|s| (s - m).exp()).sum();
        nll -= sample_w[i] * (raw[y[i]] - m - z.ln());
    }
    nll + 0.5 * RIDGE * flat.norm_squared()
}

/// Fit a multinomial logistic model. `class_weights` has one entry per
/// class; pass `inverse_frequency_weights` output for imbalance handling.
pub fn fit_logistic(
    x: &[Vec<f64>],
    y: &[usize],
    n_classes: usize,
    class_weights: &[f64],
) -> Result<LogisticModel> {
    if x.is_empty() || x.len() != y.len() {
        return Err(Error::InvalidInput("fit_logistic needs aligned rows".into()));
    }
    let observed: std::collections::BTreeSet<usize> = y.iter().copied().collect();
    if observed.len() < 2 {
        return Err(Error::DegenerateTarget(
            "logistic regression needs >= 2 observed classes".into(),
        ));
    }
    let n = x.len();
    let d = x[0].len();
    let p = d + 1; // bias + features
    let dim = n_classes * p;
    let sample_w: Vec<f64> = y.iter().map(|&c| class_weights[c]).collect();

    let mut theta = DVector::zeros(dim);
    let mut loss = weighted_nll(x, y, &sample_w, &theta, n_classes, p);
    let mut converged = false;
    let mut iterations = 0;

    for iter in 0..MAX_ITER {
        iterations = iter + 1;
        // gradient and Hessian of the weighted NLL + ridge
        let mut grad = DVector::zeros(dim);
        let mut hess = DMatrix::zeros(dim, dim);
        for (i, xi) in x.iter().enumerate() {
            let mut raw = vec![0.0; n_classes];
            for (c, r) in raw.iter_mut().enumerate() {
                let base = c * p;
                *r = theta[base]
                    + xi.iter().enumerate().map(|(j, v)| v * theta[base + 1 + j]).sum::<f64>();
            }
            let m = raw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let z: f64 = raw.iter().map(|s| (s - m).exp()).sum();
            let probs: Vec<f64> = raw.iter().map(|s| (s - m).exp() / z).collect();
            let wi = sample_w[i];
            for a in 0..n_classes {
                let ga = wi * (probs[a] - ((y[i] == a) as u8 as f64));
                let base_a = a * p;
                grad[base_a] += ga;
                for (j, v) in xi.iter().enumerate() {
                    grad[base_a + 1 + j] += ga * v;
                }
                for b in 0..n_classes {
                    let hab = wi
                        * (probs[a] * (((a == b) as u8 as f64) - probs[b]));
                    if hab == 0.0 {
                        continue;
                    }
                    let base_b = b * p;
                    // rank-one block hab * [1, x] [1, x]^T
                    hess[(base_a, base_b)] += hab;
                    for (j, v) in xi.iter().enumerate() {
                        hess[(base_a, base_b + 1 + j)] += hab * v;
                        hess[(base_a + 1 + j, base_b)] += hab * v;
                    }
                    for (j1, v1) in xi.iter().enumerate() {
                        for (j2, v2) in xi.iter().enumerate() {
                            hess[(base_a + 1 + j1, base_b + 1 + j2)] += hab * v1 * v2;
                        }
                    }
                }
            }
        }
        grad += RIDGE * &theta;
        for j in 0..dim {
            hess[(j, j)] += RIDGE;
        }

        if grad.norm() < GRAD_TOL {
            converged = true;
            break;
        }
        let Some(chol) = nalgebra::Cholesky::new(hess) else {
            break; // Hessian numerically bad; keep best iterate
        };
        let step = chol.solve(&grad);

        // damped update: halve until the objective improves
        let mut alpha = 1.0;
        let mut improved = false;
        for _ in 0..30 {
            let candidate = &theta - alpha * &step;
            let new_loss = weighted_nll(x, y, &sample_w, &candidate, n_classes, p);
            if new_loss <= loss {
                theta = candidate;
                loss = new_loss;
                improved = true;
                break;
            }
            alpha *= 0.5;
        }
        if !improved {
            break;
        }
    }

    let weights = (0..n_classes)
        .map(|c| theta.as_slice()[c * p..(c + 1) * p].to_vec())
        .collect();
    Ok(LogisticModel {
        weights,
        n_classes,
        converged,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separable_toy_problem_fits_perfectly() {
        let x: Vec<Vec<f64>> = (0..40)
            .map(|i| vec![if i < 20 { -1.0 } else { 1.0 } * (1.0 + (i % 5) as f64 * 0.1)])
            .collect();
        let y: Vec<usize> = (0..40).map(|i| (i >= 20) as usize).collect();
        let w = inverse_frequency_weights(&y, 2);
        let model = fit_logistic(&x, &y, 2, &w).unwrap();
        let correct = x
            .iter()
            .zip(&y)
            .filter(|(xi, &yi)| model.predict_class(xi) == yi)
            .count();
        assert_eq!(correct, 40);
    }

    #[test]
    fn single_class_errors() {
        let x: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64]).collect();
        let y = vec![0usize; 10];
        assert!(matches!(
            fit_logistic(&x, &y, 2, &[1.0, 1.0]),
            Err(Error::DegenerateTarget(_))
        ));
    }

    #[test]
    fn three_class_means_recovered() {
        // three Gaussian-ish blobs along one axis
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..90 {
            let c = i / 30;
            let jitter = ((i * 37 % 11) as f64 - 5.0) / 20.0;
            x.push(vec![c as f64 * 4.0 + jitter]);
            y.push(c);
        }
        let w = inverse_frequency_weights(&y, 3);
        let model = fit_logistic(&x, &y, 3, &w).unwrap();
        assert!(model.converged || model.iterations == 100);
        let correct = x
            .iter()
            .zip(&y)
            .filter(|(xi, &yi)| model.predict_class(xi) == yi)
            .count();
        assert!(correct >= 88, "correct = {correct}");
    }

    #[test]
    fn class_weights_shift_decision_toward_rare_class() {
        // 90/10 imbalance with overlapping supports
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..100 {
            let rare = i < 10;
            let base = if rare { 0.7 } else { -0.3 };
            x.push(vec![base + ((i * 13 % 7) as f64 - 3.0) * 0.2]);
            y.push(rare as usize);
        }
        let unweighted = fit_logistic(&x, &y, 2, &[1.0, 1.0]).unwrap();
        let weighted =
            fit_logistic(&x, &y, 2, &inverse_frequency_weights(&y, 2)).unwrap();
        let recall = |m: &LogisticModel| {
            let hits = x
                .iter()
                .zip(&y)
                .filter(|(xi, &yi)| yi == 1 && m.predict_class(xi) == 1)
                .count();
            hits as f64 / 10.0
        };
        assert!(recall(&weighted) >= recall(&unweighted));
    }
}
