//! Best-response witnesses: for a neighborhood's features and the predictor's
//! values there, fit the member of a transparent family that minimizes the
//! local deviation.

mod ar;
mod linear;
mod tree;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

pub use ar::{fit_ar_lagged, fit_ar_params, lag_row, ArParams};
pub use linear::{constant_params, linear_pinv_params, ridge_params, LinearParams};
pub use tree::{candidate_splits, depth_rule, median, SplitCandidate, Tree, TreeLoss, TreeNode};

pub use crate::deviation::kl_diag_gaussian;
use crate::deviation::{local_deviation, DeviationFn};
use crate::error::{Error, Result};

/// Smallest variance a Gaussian-tree leaf may predict.
pub const GAUSSIAN_VARIANCE_FLOOR: f64 = 1e-8;

/// Default ridge strength.
pub const DEFAULT_RIDGE_ALPHA: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type", content = "value")]
pub enum TreeDepth {
    Fixed(usize),
    /// `max{⌈log₂ m⌉ − 1 + offset, 1}` for a neighborhood of size `m`.
    Rule(i64),
}

impl TreeDepth {
    pub fn resolve(self, m: usize) -> usize {
        match self {
            TreeDepth::Fixed(k) => k,
            TreeDepth::Rule(offset) => depth_rule(m, offset),
        }
    }
}

/// A transparent witness family and its hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "family")]
pub enum WitnessFamily {
    Constant,
    /// Minimum-norm least squares, `θᵀx` (plus `b` with `intercept`).
    Linear { intercept: bool },
    Ridge { alpha: f64, intercept: bool },
    Tree { depth: TreeDepth, loss: TreeLoss },
    /// Features are lag rows `[x_t, …, x_{t−K+1}]` of width `order·c`.
    Ar { order: usize, alpha: f64 },
    /// Targets are `[μ, σ²]` rows; fitted by squared error, scored by KL.
    GaussianTree { depth: TreeDepth },
}

impl WitnessFamily {
    /// The deviation this family's fit minimizes (or, for Gaussian trees, is scored by).
    pub fn native_deviation(&self) -> DeviationFn {
        match self {
            WitnessFamily::Tree { loss: TreeLoss::Tv, .. } => DeviationFn::TotalVariation,
            WitnessFamily::GaussianTree { .. } => DeviationFn::KlDiagGaussian,
            _ => DeviationFn::Squared,
        }
    }

    pub fn fit(&self, features: &DMatrix<f64>, f_vals: &DMatrix<f64>) -> Result<WitnessFit> {
        match *self {
            WitnessFamily::Constant => fit_constant(f_vals),
            WitnessFamily::Linear { intercept } => fit_linear(features, f_vals, intercept),
            WitnessFamily::Ridge { alpha, intercept } => {
                let params = ridge_params(features, f_vals, alpha, 1.0, intercept)?;
                WitnessFit::from_linear(*self, params, features, f_vals)
            }
            WitnessFamily::Tree { depth, loss } => {
                let tree = Tree::fit(features, f_vals, depth.resolve(f_vals.nrows()), loss)?;
                WitnessFit::from_tree(*self, tree, features, f_vals)
            }
            WitnessFamily::Ar { order, alpha } => {
                let params = fit_ar_lagged(features, f_vals, order, alpha)?;
                let fitted = params.predict(features);
                WitnessFit::new(*self, WitnessParams::Ar(params), fitted, f_vals)
            }
            WitnessFamily::GaussianTree { depth } => fit_gaussian_tree(features, f_vals, depth.resolve(f_vals.nrows())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum WitnessParams {
    Constant { mean: DVector<f64> },
    Linear(LinearParams),
    Tree(Tree),
    Ar(ArParams),
}

impl WitnessParams {
    pub fn flatten(&self) -> Vec<f64> {
        match self {
            WitnessParams::Constant { mean } => mean.iter().copied().collect(),
            WitnessParams::Linear(p) => p.flatten(),
            WitnessParams::Tree(t) => t.flatten(),
            WitnessParams::Ar(p) => p.flatten(),
        }
    }
}

/// A fitted witness for one neighborhood: its parameters, its values on the
/// neighborhood rows (same order as the input) and the achieved deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessFit {
    pub family: WitnessFamily,
    pub params: WitnessParams,
    pub fitted_values: DMatrix<f64>,
    pub deviation: f64,
}

/// Compact JSON form of a [`WitnessFit`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WitnessSummary {
    pub family: WitnessFamily,
    pub params: Vec<f64>,
    pub deviation: f64,
}

impl WitnessFit {
    fn new(family: WitnessFamily, params: WitnessParams, fitted_values: DMatrix<f64>, f_vals: &DMatrix<f64>) -> Result<Self> {
        let deviation = local_deviation(f_vals, &fitted_values, family.native_deviation())?;
        Ok(Self { family, params, fitted_values, deviation })
    }

    fn from_linear(family: WitnessFamily, params: LinearParams, x: &DMatrix<f64>, f_vals: &DMatrix<f64>) -> Result<Self> {
        let fitted = params.predict(x);
        Self::new(family, WitnessParams::Linear(params), fitted, f_vals)
    }

    fn from_tree(family: WitnessFamily, tree: Tree, x: &DMatrix<f64>, f_vals: &DMatrix<f64>) -> Result<Self> {
        let fitted = tree.predict(x);
        Self::new(family, WitnessParams::Tree(tree), fitted, f_vals)
    }

    /// Witness outputs at arbitrary feature rows.
    pub fn predict(&self, features: &DMatrix<f64>) -> DMatrix<f64> {
        match &self.params {
            WitnessParams::Constant { mean } => {
                DMatrix::from_fn(features.nrows(), mean.len(), |_, c| mean[c])
            }
            WitnessParams::Linear(p) => p.predict(features),
            WitnessParams::Tree(t) => t.predict(features),
            WitnessParams::Ar(p) => p.predict(features),
        }
    }

    pub fn summary(&self) -> WitnessSummary {
        WitnessSummary { family: self.family, params: self.params.flatten(), deviation: self.deviation }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.summary())?)
    }
}

/// Column-mean witness.
pub fn fit_constant(f_vals: &DMatrix<f64>) -> Result<WitnessFit> {
    let mean = constant_params(f_vals)?;
    let fitted = DMatrix::from_fn(f_vals.nrows(), f_vals.ncols(), |_, c| mean[c]);
    WitnessFit::new(WitnessFamily::Constant, WitnessParams::Constant { mean }, fitted, f_vals)
}

/// `θ = X⁺ f`, no intercept.
pub fn fit_linear_pinv(x: &DMatrix<f64>, f_vals: &DMatrix<f64>) -> Result<WitnessFit> {
    fit_linear(x, f_vals, false)
}

fn fit_linear(x: &DMatrix<f64>, f_vals: &DMatrix<f64>, intercept: bool) -> Result<WitnessFit> {
    let params = linear_pinv_params(x, f_vals, intercept)?;
    WitnessFit::from_linear(WitnessFamily::Linear { intercept }, params, x, f_vals)
}

/// Ridge witness without intercept, `(XᵀX + αI)θ = Xᵀf`.
pub fn fit_ridge(x: &DMatrix<f64>, f_vals: &DMatrix<f64>, alpha: f64) -> Result<WitnessFit> {
    fit_ridge_weighted(x, f_vals, alpha, 1.0)
}

/// Ridge witness with the data term weighted by `weight`:
/// `(w XᵀX + αI)θ = w Xᵀf`.
pub fn fit_ridge_weighted(x: &DMatrix<f64>, f_vals: &DMatrix<f64>, alpha: f64, weight: f64) -> Result<WitnessFit> {
    let params = ridge_params(x, f_vals, alpha, weight, false)?;
    WitnessFit::from_linear(WitnessFamily::Ridge { alpha, intercept: false }, params, x, f_vals)
}

pub fn fit_tree_mse(features: &DMatrix<f64>, f_vals: &DMatrix<f64>, max_depth: usize) -> Result<WitnessFit> {
    WitnessFamily::Tree { depth: TreeDepth::Fixed(max_depth), loss: TreeLoss::Mse }.fit(features, f_vals)
}

pub fn fit_tree_tv(features: &DMatrix<f64>, f_vals: &DMatrix<f64>, max_depth: usize) -> Result<WitnessFit> {
    WitnessFamily::Tree { depth: TreeDepth::Fixed(max_depth), loss: TreeLoss::Tv }.fit(features, f_vals)
}

/// AR(`order`) witness over histories (each `len × c`, last row current).
pub fn fit_ar(histories: &[DMatrix<f64>], mu_vals: &DMatrix<f64>, order: usize, alpha: f64) -> Result<WitnessFit> {
    let params = fit_ar_params(histories, mu_vals, order, alpha)?;
    let c = mu_vals.ncols();
    let mut lags = DMatrix::zeros(histories.len(), order * c);
    for (r, h) in histories.iter().enumerate() {
        for (k, v) in lag_row(h, order)?.into_iter().enumerate() {
            lags[(r, k)] = v;
        }
    }
    let fitted = params.predict(&lags);
    WitnessFit::new(WitnessFamily::Ar { order, alpha }, WitnessParams::Ar(params), fitted, mu_vals)
}

/// Squared-error tree on `[μ, σ²]` rows with leaf variances clamped to
/// [`GAUSSIAN_VARIANCE_FLOOR`]; the reported deviation is the mean
/// `KL(witness ‖ predictor)`.
pub fn fit_gaussian_tree(features: &DMatrix<f64>, mu_var: &DMatrix<f64>, max_depth: usize) -> Result<WitnessFit> {
    let width = mu_var.ncols();
    if width == 0 || width % 2 != 0 {
        return Err(Error::Shape(format!("gaussian targets need an even width, got {width}")));
    }
    let q = width / 2;
    if mu_var.columns(q, q).iter().any(|&v| !(v > 0.0)) {
        return Err(Error::InvalidInput("gaussian targets hold a non-positive variance".into()));
    }
    let mut tree = Tree::fit(features, mu_var, max_depth, TreeLoss::Mse)?;
    tree.clamp_leaves(q, GAUSSIAN_VARIANCE_FLOOR);
    WitnessFit::from_tree(WitnessFamily::GaussianTree { depth: TreeDepth::Fixed(max_depth) }, tree, features, mu_var)
}
