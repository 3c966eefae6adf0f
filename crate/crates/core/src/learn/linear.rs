//! Ridge / ordinary least-squares regression via the normal equations.

use crate::{Error, Result};
use nalgebra::{Cholesky, DMatrix, DVector};

#[derive(Debug, Clone)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub intercept: f64,
}

impl LinearModel {
    pub fn predict(&self, x: &[f64]) -> f64 {
        self.intercept + x.iter().zip(&self.weights).map(|(a, b)| a * b).sum::<f64>()
    }
}

/// Minimize ||Xw - y||^2 + lambda ||w||^2 with an unpenalized intercept,
/// by Cholesky factorization of the centered normal equations.
pub fn fit_linear_ridge(x: &[Vec<f64>], y: &[f64], lambda: f64) -> Result<LinearModel> {
    if x.is_empty() || x.len() != y.len() {
        return Err(Error::InvalidInput("fit_linear_ridge needs aligned rows".into()));
    }
    assert!(lambda >= 0.0);
    let n = x.len();
    let d = x[0].len();
    let x_mean: Vec<f64> = (0..d)
        .map(|j| x.iter().map(|r| r[j]).sum::<f64>() / n as f64)
        .collect();
    let y_mean = y.iter().sum::<f64>() / n as f64;

    let xc = DMatrix::from_fn(n, d, |i, j| x[i][j] - x_mean[j]);
    let yc = DVector::from_fn(n, |i, _| y[i] - y_mean);
    let mut gram = xc.tr_mul(&xc);
    for j in 0..d {
        gram[(j, j)] += lambda;
    }
    let rhs = xc.tr_mul(&yc);
    let chol = Cholesky::new(gram).ok_or(Error::SingularSystem)?;
    let w = chol.solve(&rhs);
    let intercept = y_mean - w.iter().zip(&x_mean).map(|(a, b)| a * b).sum::<f64>();
    Ok(LinearModel {
        weights: w.iter().copied().collect(),
        intercept,
    })
}

/// Shared-design ridge: factor the centered Gram matrix once and solve for
/// many targets. `lambda_scale` multiplies the mean Gram diagonal to give
/// the actual ridge strength (0 disables regularization).
pub struct RidgeSolver {
    chol: Cholesky<f64, nalgebra::Dyn>,
    xc: DMatrix<f64>,
    x_mean: Vec<f64>,
}

impl RidgeSolver {
    pub fn new(x: &[Vec<f64>], lambda_scale: f64) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::InvalidInput("RidgeSolver needs rows".into()));
        }
        let n = x.len();
        let d = x[0].len();
        let x_mean: Vec<f64> = (0..d)
            .map(|j| x.iter().map(|r| r[j]).sum::<f64>() / n as f64)
            .collect();
        let xc = DMatrix::from_fn(n, d, |i, j| x[i][j] - x_mean[j]);
        let mut gram = xc.tr_mul(&xc);
        let lambda = lambda_scale * gram.diagonal().mean();
        for j in 0..d {
            gram[(j, j)] += lambda;
        }
        let chol = Cholesky::new(gram).ok_or(Error::SingularSystem)?;
        Ok(Self { chol, xc, x_mean })
    }

    pub fn solve(&self, y: &[f64]) -> LinearModel {
        let n = self.xc.nrows();
        let y_mean = y.iter().sum::<f64>() / n as f64;
        let yc = DVector::from_fn(n, |i, _| y[i] - y_mean);
        let rhs = self.xc.tr_mul(&yc);
        let w = self.chol.solve(&rhs);
        let intercept = y_mean - w.iter().zip(&self.x_mean).map(|(a, b)| a * b).sum::<f64>();
        LinearModel {
            weights: w.iter().copied().collect(),
            intercept,
        }
    }
}
