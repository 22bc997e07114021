//! Training criteria that couple a predictor with per-neighborhood witnesses:
//! a uniform δ-margin constraint, the symmetric and asymmetric games, and the
//! anchor-local adjusted form of the symmetric game.

mod objective;
mod train;

use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

pub use objective::{
    adjusted_gradient, anchor_witness_values, asymmetric_gradient, compute_adjusted_targets, eval_adjusted_objective,
    eval_asymmetric_objective, eval_symmetric_objective, fit_witnesses, neighborhood_deviations, primal_loss,
    primal_loss_gradient, symmetric_gradient, AdjustedTarget,
};
pub use train::{train, train_asymmetric, train_symmetric, train_uniform};

use crate::dataset::Dataset;
use crate::deviation::DeviationFn;
use crate::error::{Error, Result};
use crate::witness::{WitnessFamily, WitnessFit};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Criterion {
    /// `dev_i ≤ δ` on every neighborhood; `f64::INFINITY` disables the constraints.
    Uniform { delta: f64 },
    Symmetric { lambda: f64 },
    Asymmetric { lambda: f64 },
    AdjustedSymmetric { lambda: f64 },
}

impl Criterion {
    /// λ for the penalized games, δ for the uniform criterion.
    pub fn strength(&self) -> f64 {
        match *self {
            Criterion::Uniform { delta } => delta,
            Criterion::Symmetric { lambda } | Criterion::Asymmetric { lambda } | Criterion::AdjustedSymmetric { lambda } => {
                lambda
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Criterion::Uniform { .. } => "uniform",
            Criterion::Symmetric { .. } => "symmetric",
            Criterion::Asymmetric { .. } => "asymmetric",
            Criterion::AdjustedSymmetric { .. } => "adjusted_symmetric",
        }
    }
}

/// How the uniform criterion's constraints enter the Lagrangian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MultiplierForm {
    /// One `ξ_i ≥ 0` per neighborhood on `dev_i − δ`.
    Scalar,
    /// A multiplier vector per neighborhood on the residual `f_B − ĝ_i(X_B)`
    /// with the constraint `‖r_i‖ ≤ sqrt(δ|B_i|)`. Squared deviation only;
    /// other deviations fall back to [`MultiplierForm::Scalar`].
    #[default]
    Residual,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrimalLoss {
    #[default]
    Squared,
    /// Binary cross-entropy on probabilities clamped to `[1e−7, 1 − 1e−7]`.
    CrossEntropy,
}

/// Probability clamp for the cross-entropy loss.
pub const PROBABILITY_CLAMP: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GameConfig {
    pub criterion: Criterion,
    pub witness: WitnessFamily,
    pub deviation: DeviationFn,
    pub primal_loss: PrimalLoss,
    pub outer_iterations: usize,
    pub witness_refresh_period: usize,
    /// Adam step for gradient-trained predictors; primal step for the uniform criterion.
    pub learning_rate: f64,
    /// Multiplier step for the uniform criterion.
    pub dual_learning_rate: f64,
    /// Predictor gradient steps per outer iteration.
    pub inner_steps: usize,
    /// Stop once `‖Δf‖∞` between outer iterations falls to this value.
    pub tolerance: f64,
    /// Allowed slack `dev_i − δ` when counting violations.
    pub constraint_tolerance: f64,
    pub multipliers: MultiplierForm,
    pub seed: u64,
}

impl Default for GameConfig {
    fn default() -> Self {
        Self {
            criterion: Criterion::Symmetric { lambda: 1.0 },
            witness: WitnessFamily::Linear { intercept: false },
            deviation: DeviationFn::Squared,
            primal_loss: PrimalLoss::Squared,
            outer_iterations: 1000,
            witness_refresh_period: 1,
            learning_rate: 1e-2,
            dual_learning_rate: 1e-1,
            inner_steps: 1,
            tolerance: 1e-10,
            constraint_tolerance: 1e-4,
            multipliers: MultiplierForm::default(),
            seed: 0,
        }
    }
}

impl GameConfig {
    pub fn validate(&self) -> Result<()> {
        let s = self.criterion.strength();
        if s.is_nan() || s < 0.0 {
            return Err(Error::Config(format!("{} strength must be >= 0, got {s}", self.criterion.name())));
        }
        if !matches!(self.criterion, Criterion::Uniform { .. }) && !s.is_finite() {
            return Err(Error::Config("lambda must be finite".into()));
        }
        if self.outer_iterations == 0 || self.witness_refresh_period == 0 || self.inner_steps == 0 {
            return Err(Error::Config("iteration counts must be >= 1".into()));
        }
        if !(self.learning_rate > 0.0) || !(self.dual_learning_rate > 0.0) {
            return Err(Error::Config("step sizes must be > 0".into()));
        }
        if matches!(self.criterion, Criterion::AdjustedSymmetric { .. }) && self.deviation != DeviationFn::Squared {
            return Err(Error::Config("the adjusted objective is defined for squared deviation only".into()));
        }
        Ok(())
    }
}

/// What the two players see: predictor inputs, witness features and targets,
/// one row per anchor.
#[derive(Debug, Clone, PartialEq)]
pub struct GameData {
    pub inputs: DMatrix<f64>,
    pub features: DMatrix<f64>,
    pub targets: DMatrix<f64>,
}

impl GameData {
    pub fn new(inputs: DMatrix<f64>, features: DMatrix<f64>, targets: DMatrix<f64>) -> Result<Self> {
        let n = targets.nrows();
        if inputs.nrows() != n || features.nrows() != n || n == 0 {
            return Err(Error::Shape(format!(
                "inputs {}, features {}, targets {} rows",
                inputs.nrows(),
                features.nrows(),
                n
            )));
        }
        Ok(Self { inputs, features, targets })
    }

    pub fn len(&self) -> usize {
        self.targets.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.nrows() == 0
    }
}

impl From<&Dataset> for GameData {
    /// Predictor and witnesses both see the dataset inputs.
    fn from(d: &Dataset) -> Self {
        Self { inputs: d.inputs().clone(), features: d.inputs().clone(), targets: d.targets().clone() }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct GameTraces {
    pub primal_loss: Vec<f64>,
    pub objective: Vec<f64>,
    pub mean_dev: Vec<f64>,
    pub max_dev: Vec<f64>,
    pub violations: Vec<usize>,
    pub multiplier_norm: Vec<f64>,
}

impl GameTraces {
    pub fn len(&self) -> usize {
        self.primal_loss.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primal_loss.is_empty()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GameReport {
    pub criterion: Criterion,
    pub iterations: usize,
    pub converged: bool,
    /// `‖Δf‖∞` of the last outer iteration.
    pub last_change: f64,
    pub traces: GameTraces,
    pub final_values: DMatrix<f64>,
    pub witnesses: Vec<WitnessFit>,
    /// Uniform criterion only.
    pub multipliers: Option<Vec<f64>>,
    /// Primal and dual steps in force at the end (uniform criterion only).
    pub final_steps: Option<(f64, f64)>,
}

impl GameReport {
    pub fn final_deviations(&self, ns: &crate::neighborhood::NeighborhoodSystem, dev: DeviationFn) -> Result<Vec<f64>> {
        neighborhood_deviations(&self.witnesses, &self.final_values, ns, dev)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// `iteration,primal_loss,mean_dev,max_dev,violations`
    pub fn write_traces_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["iteration", "primal_loss", "mean_dev", "max_dev", "violations"])?;
        let t = &self.traces;
        for i in 0..t.len() {
            w.write_record([
                (i + 1).to_string(),
                t.primal_loss[i].to_string(),
                t.mean_dev[i].to_string(),
                t.max_dev[i].to_string(),
                t.violations[i].to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_traces_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_traces_csv(std::fs::File::create(path)?)
    }
}
