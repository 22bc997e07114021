//! Constant, least-squares (pseudo-inverse) and ridge witnesses.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{column_means, pinv_solve, ridge_solve};

/// `g(x) = θᵀx (+ b)`. `theta` is `d×Q`; `intercept` is `Q` when present.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearParams {
    pub theta: DMatrix<f64>,
    pub intercept: Option<DVector<f64>>,
}

impl LinearParams {
    pub fn predict(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = x * &self.theta;
        if let Some(b) = &self.intercept {
            for mut row in out.row_iter_mut() {
                row += b.transpose();
            }
        }
        out
    }

    /// `[b, θ (row-major)]`, intercept first when present.
    pub fn flatten(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self.intercept.iter().flat_map(|b| b.iter().copied()).collect();
        for r in 0..self.theta.nrows() {
            out.extend(self.theta.row(r).iter());
        }
        out
    }
}

pub(crate) fn check_rows(features: &DMatrix<f64>, f_vals: &DMatrix<f64>) -> Result<()> {
    if features.nrows() != f_vals.nrows() {
        return Err(Error::Shape(format!(
            "{} feature rows but {} predictor rows",
            features.nrows(),
            f_vals.nrows()
        )));
    }
    if f_vals.nrows() == 0 {
        return Err(Error::InvalidInput("witness fit needs m >= 1".into()));
    }
    Ok(())
}

/// Column means: the best constant under squared deviation.
pub fn constant_params(f_vals: &DMatrix<f64>) -> Result<DVector<f64>> {
    if f_vals.nrows() == 0 {
        return Err(Error::InvalidInput("witness fit needs m >= 1".into()));
    }
    Ok(column_means(f_vals))
}

/// Minimum-norm least squares `θ = X⁺ f`, optionally with an appended
/// intercept column.
pub fn linear_pinv_params(x: &DMatrix<f64>, f_vals: &DMatrix<f64>, intercept: bool) -> Result<LinearParams> {
    check_rows(x, f_vals)?;
    if !intercept {
        return Ok(LinearParams { theta: pinv_solve(x, f_vals), intercept: None });
    }
    let d = x.ncols();
    let aug = x.clone().insert_column(d, 1.0);
    let sol = pinv_solve(&aug, f_vals);
    Ok(LinearParams {
        theta: sol.rows(0, d).into_owned(),
        intercept: Some(sol.row(d).transpose()),
    })
}

/// `argmin_θ w‖f − Xθ − b‖² + α‖θ‖²` per output column. The intercept, when
/// requested, is left unpenalized (solved on centered data).
pub fn ridge_params(
    x: &DMatrix<f64>,
    f_vals: &DMatrix<f64>,
    alpha: f64,
    weight: f64,
    intercept: bool,
) -> Result<LinearParams> {
    check_rows(x, f_vals)?;
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidInput(format!("ridge alpha must be > 0, got {alpha}")));
    }
    if !(weight >= 0.0) || !weight.is_finite() {
        return Err(Error::InvalidInput(format!("ridge data weight must be >= 0, got {weight}")));
    }
    if !intercept {
        return Ok(LinearParams { theta: ridge_solve(x, f_vals, alpha, weight), intercept: None });
    }
    let x_mean = column_means(x);
    let f_mean = column_means(f_vals);
    let mut xc = x.clone();
    for mut row in xc.row_iter_mut() {
        row -= x_mean.transpose();
    }
    let mut fc = f_vals.clone();
    for mut row in fc.row_iter_mut() {
        row -= f_mean.transpose();
    }
    let theta = ridge_solve(&xc, &fc, alpha, weight);
    let b = f_mean - theta.transpose() * x_mean;
    Ok(LinearParams { theta, intercept: Some(b) })
}
