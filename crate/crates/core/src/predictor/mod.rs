//! Predictor-side models. Every model maps an input matrix (one row per
//! anchor) to an output matrix and exposes its parameters as a flat vector
//! together with the vector–Jacobian product used by the games.

mod mlp;
mod piecewise;
mod sequence;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

pub use mlp::{Activation, ForwardCache, Mlp, MlpGradients, OutputActivation};
pub use piecewise::{piecewise_linear_eval, PiecewiseLinear};
pub use sequence::{
    ar_neighborhood_effective, ar_rollout, sequence_neighborhood_views, window_row, RolloutModel, SequencePredictor,
    SequenceView,
};

use crate::error::{Error, Result};

pub trait Predictor: Send + Sync {
    fn n_outputs(&self) -> usize;

    fn predict(&self, inputs: &DMatrix<f64>) -> Result<DMatrix<f64>>;

    fn params(&self) -> Vec<f64>;

    fn set_params(&mut self, params: &[f64]) -> Result<()>;

    /// Gradient w.r.t. the parameters of `Σ_{r,c} output_grad[r,c] · f(inputs)[r,c]`.
    fn param_gradient(&self, inputs: &DMatrix<f64>, output_grad: &DMatrix<f64>) -> Result<Vec<f64>>;

    /// Direct access for models with one free value per anchor.
    fn as_tabular_mut(&mut self) -> Option<&mut TabularPredictor> {
        None
    }
}

/// One free output row per training anchor. Inputs only fix the row count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabularPredictor {
    pub values: DMatrix<f64>,
}

impl TabularPredictor {
    pub fn new(values: DMatrix<f64>) -> Result<Self> {
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("tabular predictor values"));
        }
        Ok(Self { values })
    }

    pub fn zeros(n: usize, q: usize) -> Self {
        Self { values: DMatrix::zeros(n, q) }
    }
}

impl Predictor for TabularPredictor {
    fn n_outputs(&self) -> usize {
        self.values.ncols()
    }

    fn predict(&self, inputs: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if inputs.nrows() != self.values.nrows() {
            return Err(Error::Shape(format!(
                "tabular predictor holds {} rows, asked for {}",
                self.values.nrows(),
                inputs.nrows()
            )));
        }
        Ok(self.values.clone())
    }

    /// Row-major.
    fn params(&self) -> Vec<f64> {
        self.values.transpose().iter().copied().collect()
    }

    fn set_params(&mut self, params: &[f64]) -> Result<()> {
        let (n, q) = self.values.shape();
        if params.len() != n * q {
            return Err(Error::Shape(format!("expected {} parameters, got {}", n * q, params.len())));
        }
        self.values = DMatrix::from_row_slice(n, q, params);
        Ok(())
    }

    fn param_gradient(&self, inputs: &DMatrix<f64>, output_grad: &DMatrix<f64>) -> Result<Vec<f64>> {
        if inputs.nrows() != self.values.nrows() || output_grad.shape() != self.values.shape() {
            return Err(Error::Shape("tabular gradient shape mismatch".into()));
        }
        Ok(output_grad.transpose().iter().copied().collect())
    }

    fn as_tabular_mut(&mut self) -> Option<&mut TabularPredictor> {
        Some(self)
    }
}

/// Adam over a flat parameter vector.
#[derive(Debug, Clone)]
pub struct Adam {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    pub fn new(learning_rate: f64, n_params: usize) -> Self {
        Self { learning_rate, beta1: 0.9, beta2: 0.999, epsilon: 1e-8, m: vec![0.0; n_params], v: vec![0.0; n_params], t: 0 }
    }

    pub fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t);
        let bc2 = 1.0 - self.beta2.powi(self.t);
        for (((p, g), m), v) in params.iter_mut().zip(grad).zip(&mut self.m).zip(&mut self.v) {
            *m = self.beta1 * *m + (1.0 - self.beta1) * g;
            *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
            *p -= self.learning_rate * (*m / bc1) / ((*v / bc2).sqrt() + self.epsilon);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tabular_round_trips_parameters() {
        let mut t = TabularPredictor::new(DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0])).unwrap();
        assert_eq!(t.params(), vec![1.0, 2.0, 3.0, 4.0]);
        t.set_params(&[0.0, 1.0, 2.0, 3.0]).unwrap();
        assert_eq!(t.values[(1, 0)], 2.0);
        let g = t.param_gradient(&DMatrix::zeros(2, 1), &DMatrix::from_row_slice(2, 2, &[5.0, 6.0, 7.0, 8.0])).unwrap();
        assert_eq!(g, vec![5.0, 6.0, 7.0, 8.0]);
        assert!(t.predict(&DMatrix::zeros(3, 1)).is_err());
    }

    #[test]
    fn adam_minimizes_a_quadratic() {
        let mut p = vec![3.0, -2.0];
        let mut opt = Adam::new(0.1, 2);
        for _ in 0..2000 {
            let g: Vec<f64> = p.iter().map(|x| 2.0 * x).collect();
            opt.step(&mut p, &g);
        }
        assert!(p.iter().all(|x| x.abs() < 1e-3));
    }
}
