//! Piecewise-linear functions of one input.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::Predictor;
use crate::error::{Error, Result};

fn check_knots(knots: &[f64], values: &[f64]) -> Result<()> {
    if knots.len() < 2 || knots.len() != values.len() {
        return Err(Error::InvalidInput(format!(
            "need >= 2 knots with matching values, got {} knots and {} values",
            knots.len(),
            values.len()
        )));
    }
    if knots.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidInput("knots must be strictly increasing".into()));
    }
    Ok(())
}

/// Segment index `k` and weight `w` so that the value is `(1−w)·v_k + w·v_{k+1}`.
/// Outside the knot range the end segments are extended.
fn locate(knots: &[f64], x: f64) -> (usize, f64) {
    let n = knots.len();
    let k = match knots.partition_point(|&t| t <= x) {
        0 => 0,
        p if p >= n => n - 2,
        p => p - 1,
    };
    (k, (x - knots[k]) / (knots[k + 1] - knots[k]))
}

/// Linear interpolation between bracketing knots, linear extrapolation past the ends.
pub fn piecewise_linear_eval(knots: &[f64], values: &[f64], x: f64) -> Result<f64> {
    check_knots(knots, values)?;
    let (k, w) = locate(knots, x);
    Ok((1.0 - w) * values[k] + w * values[k + 1])
}

/// Trainable piecewise-linear predictor: knots are fixed, values are the parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseLinear {
    pub knots: Vec<f64>,
    pub values: Vec<f64>,
}

impl PiecewiseLinear {
    pub fn new(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        check_knots(&knots, &values)?;
        Ok(Self { knots, values })
    }

    pub fn eval(&self, x: f64) -> f64 {
        let (k, w) = locate(&self.knots, x);
        (1.0 - w) * self.values[k] + w * self.values[k + 1]
    }
}

impl Predictor for PiecewiseLinear {
    fn n_outputs(&self) -> usize {
        1
    }

    fn predict(&self, inputs: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if inputs.ncols() != 1 {
            return Err(Error::Shape(format!("piecewise-linear input has {} columns", inputs.ncols())));
        }
        Ok(inputs.map(|x| self.eval(x)))
    }

    fn params(&self) -> Vec<f64> {
        self.values.clone()
    }

    fn set_params(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.values.len() {
            return Err(Error::Shape(format!("expected {} values, got {}", self.values.len(), params.len())));
        }
        self.values.copy_from_slice(params);
        Ok(())
    }

    fn param_gradient(&self, inputs: &DMatrix<f64>, output_grad: &DMatrix<f64>) -> Result<Vec<f64>> {
        if inputs.ncols() != 1 || output_grad.shape() != (inputs.nrows(), 1) {
            return Err(Error::Shape("piecewise-linear gradient shape mismatch".into()));
        }
        let mut grad = vec![0.0; self.values.len()];
        for r in 0..inputs.nrows() {
            let (k, w) = locate(&self.knots, inputs[(r, 0)]);
            grad[k] += (1.0 - w) * output_grad[(r, 0)];
            grad[k + 1] += w * output_grad[(r, 0)];
        }
        Ok(grad)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_examples() {
        let knots = [0.0, 1.0, 3.0];
        let values = [0.0, 2.0, 1.0];
        assert_eq!(piecewise_linear_eval(&knots, &values, 1.0).unwrap(), 2.0);
        assert_eq!(piecewise_linear_eval(&knots, &values, 3.0).unwrap(), 1.0);
        assert_eq!(piecewise_linear_eval(&[0.0, 1.0], &[0.0, 2.0], 0.5).unwrap(), 1.0);
        // last slope is -1/2
        assert_eq!(piecewise_linear_eval(&knots, &values, 5.0).unwrap(), 0.0);
        assert_eq!(piecewise_linear_eval(&knots, &values, -1.0).unwrap(), -2.0);
        assert!(piecewise_linear_eval(&[1.0, 0.0], &[0.0, 0.0], 0.5).is_err());
        assert!(piecewise_linear_eval(&[1.0], &[0.0], 0.5).is_err());
    }

    #[test]
    fn gradient_is_the_interpolation_weights() {
        let p = PiecewiseLinear::new(vec![0.0, 1.0, 2.0], vec![1.0, -1.0, 4.0]).unwrap();
        let x = DMatrix::from_column_slice(2, 1, &[0.25, 1.5]);
        let g = p.param_gradient(&x, &DMatrix::from_column_slice(2, 1, &[1.0, 2.0])).unwrap();
        assert_eq!(g, vec![0.75, 0.25 + 1.0, 1.0]);
    }
}
