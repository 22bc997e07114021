//! K-order autoregressive witnesses `Σ_k θ_k x_{t−k+1} + θ₀` for sequences.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::linear::{linear_pinv_params, ridge_params};
use crate::error::{Error, Result};

/// `theta_k[k]` multiplies `x_{t−k}` (so `theta_k[0]` is θ₁ acting on the
/// most recent value); `theta_0` is the unpenalized offset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArParams {
    pub theta_k: Vec<DMatrix<f64>>,
    pub theta_0: DVector<f64>,
}

impl ArParams {
    pub fn order(&self) -> usize {
        self.theta_k.len()
    }

    pub fn channels(&self) -> usize {
        self.theta_0.len()
    }

    /// Next-step mean from a lag row `[x_t, x_{t−1}, …, x_{t−K+1}]`.
    pub fn predict_lagged(&self, lags: &[f64]) -> DVector<f64> {
        let c = self.channels();
        let mut out = self.theta_0.clone();
        for (k, theta) in self.theta_k.iter().enumerate() {
            let x = DVector::from_column_slice(&lags[k * c..(k + 1) * c]);
            out += theta * x;
        }
        out
    }

    /// Row-wise prediction for a lag matrix (`m × K·c`).
    pub fn predict(&self, lags: &DMatrix<f64>) -> DMatrix<f64> {
        let c = self.channels();
        let mut out = DMatrix::zeros(lags.nrows(), c);
        for r in 0..lags.nrows() {
            let row: Vec<f64> = lags.row(r).iter().copied().collect();
            out.row_mut(r).copy_from(&self.predict_lagged(&row).transpose());
        }
        out
    }

    /// `[θ₀, θ₁ (row-major), …, θ_K (row-major)]`.
    pub fn flatten(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self.theta_0.iter().copied().collect();
        for theta in &self.theta_k {
            for r in 0..theta.nrows() {
                out.extend(theta.row(r).iter());
            }
        }
        out
    }
}

/// Stacks `[x_t, x_{t−1}, …, x_{t−K+1}]` for one history whose last row is `x_t`.
pub fn lag_row(history: &DMatrix<f64>, order: usize) -> Result<Vec<f64>> {
    let len = history.nrows();
    if len < order {
        return Err(Error::InvalidInput(format!("window of length {len} is shorter than AR order {order}")));
    }
    let mut out = Vec::with_capacity(order * history.ncols());
    for k in 0..order {
        out.extend(history.row(len - 1 - k).iter());
    }
    Ok(out)
}

/// Fits an AR(`order`) witness on `m` histories (each `len × c`, last row is
/// the current value) against the predictor means `mu_vals` (`m × c`).
///
/// `alpha > 0` solves the ridge problem with an unpenalized offset;
/// `alpha == 0` gives the minimum-norm least-squares solution.
pub fn fit_ar_params(histories: &[DMatrix<f64>], mu_vals: &DMatrix<f64>, order: usize, alpha: f64) -> Result<ArParams> {
    if order == 0 {
        return Err(Error::InvalidInput("AR order must be >= 1".into()));
    }
    if histories.len() != mu_vals.nrows() {
        return Err(Error::Shape(format!("{} histories but {} mean rows", histories.len(), mu_vals.nrows())));
    }
    let c = mu_vals.ncols();
    let mut data = Vec::with_capacity(histories.len() * order * c);
    for h in histories {
        if h.ncols() != c {
            return Err(Error::Shape(format!("history has {} channels, means have {c}", h.ncols())));
        }
        data.extend(lag_row(h, order)?);
    }
    let lags = DMatrix::from_row_slice(histories.len(), order * c, &data);
    fit_ar_lagged(&lags, mu_vals, order, alpha)
}

/// As [`fit_ar_params`] but on a pre-built lag matrix (`m × K·c`).
pub fn fit_ar_lagged(lags: &DMatrix<f64>, mu_vals: &DMatrix<f64>, order: usize, alpha: f64) -> Result<ArParams> {
    let c = mu_vals.ncols();
    if order == 0 || lags.ncols() != order * c {
        return Err(Error::Shape(format!("lag width {} != order {order} x channels {c}", lags.ncols())));
    }
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidInput(format!("AR alpha must be >= 0, got {alpha}")));
    }
    let lin = if alpha > 0.0 {
        ridge_params(lags, mu_vals, alpha, 1.0, true)?
    } else {
        linear_pinv_params(lags, mu_vals, true)?
    };
    // lin.theta is (K·c) × c with entry [k·c + r, q] = (θ_{k+1})[q, r].
    let theta_k = (0..order)
        .map(|k| DMatrix::from_fn(c, c, |q, r| lin.theta[(k * c + r, q)]))
        .collect();
    let theta_0 = lin.intercept.expect("AR fit carries an offset");
    Ok(ArParams { theta_k, theta_0 })
}
