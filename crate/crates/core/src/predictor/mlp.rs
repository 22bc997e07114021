//! Fully connected networks with exact reverse-mode gradients.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::Predictor;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    #[default]
    Tanh,
    Relu,
}

impl Activation {
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Tanh => z.tanh(),
            Activation::Relu => z.max(0.0),
        }
    }

    /// Derivative expressed through the pre-activation `z` and output `a`.
    fn derivative(self, z: f64, a: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - a * a,
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputActivation {
    #[default]
    Identity,
    Sigmoid,
}

impl OutputActivation {
    fn apply(self, z: f64) -> f64 {
        match self {
            OutputActivation::Identity => z,
            OutputActivation::Sigmoid => 1.0 / (1.0 + (-z).exp()),
        }
    }

    fn derivative(self, a: f64) -> f64 {
        match self {
            OutputActivation::Identity => 1.0,
            OutputActivation::Sigmoid => a * (1.0 - a),
        }
    }
}

/// `weights[l]` is `out × in`; rows of the input matrix are samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "MlpJson", try_from = "MlpJson")]
pub struct Mlp {
    pub weights: Vec<DMatrix<f64>>,
    pub biases: Vec<DVector<f64>>,
    pub activation: Activation,
    pub output: OutputActivation,
}

/// Pre- and post-activation values of every layer for one batch.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    pub inputs: DMatrix<f64>,
    pub pre: Vec<DMatrix<f64>>,
    pub post: Vec<DMatrix<f64>>,
}

impl ForwardCache {
    pub fn output(&self) -> &DMatrix<f64> {
        self.post.last().unwrap_or(&self.inputs)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpGradients {
    pub weights: Vec<DMatrix<f64>>,
    pub biases: Vec<DVector<f64>>,
}

impl MlpGradients {
    pub fn flatten(&self) -> Vec<f64> {
        flatten_layers(&self.weights, &self.biases)
    }
}

fn flatten_layers(weights: &[DMatrix<f64>], biases: &[DVector<f64>]) -> Vec<f64> {
    let mut out = Vec::new();
    for (w, b) in weights.iter().zip(biases) {
        for r in 0..w.nrows() {
            out.extend(w.row(r).iter());
        }
        out.extend(b.iter());
    }
    out
}

impl Mlp {
    /// Layer sizes `[in, hidden…, out]`, weights drawn from
    /// `uniform(−0.5, 0.5)/sqrt(fan_in)`, zero biases.
    pub fn new(sizes: &[usize], activation: Activation, output: OutputActivation, rng: &mut impl Rng) -> Result<Self> {
        check_sizes(sizes)?;
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for w in sizes.windows(2) {
            let scale = 1.0 / (w[0] as f64).sqrt();
            weights.push(DMatrix::from_fn(w[1], w[0], |_, _| (rng.random::<f64>() - 0.5) * scale));
            biases.push(DVector::zeros(w[1]));
        }
        Ok(Self { weights, biases, activation, output })
    }

    pub fn zeros(sizes: &[usize], activation: Activation, output: OutputActivation) -> Result<Self> {
        check_sizes(sizes)?;
        let weights = sizes.windows(2).map(|w| DMatrix::zeros(w[1], w[0])).collect();
        let biases = sizes.windows(2).map(|w| DVector::zeros(w[1])).collect();
        Ok(Self { weights, biases, activation, output })
    }

    pub fn from_layers(
        weights: Vec<DMatrix<f64>>,
        biases: Vec<DVector<f64>>,
        activation: Activation,
        output: OutputActivation,
    ) -> Result<Self> {
        if weights.is_empty() || weights.len() != biases.len() {
            return Err(Error::Shape("need one bias per weight matrix and at least one layer".into()));
        }
        for (l, (w, b)) in weights.iter().zip(&biases).enumerate() {
            if w.nrows() != b.len() || (l > 0 && weights[l - 1].nrows() != w.ncols()) {
                return Err(Error::Shape(format!("layer {l} does not chain")));
            }
        }
        if weights.iter().any(|w| !w.iter().all(|v| v.is_finite()))
            || biases.iter().any(|b| !b.iter().all(|v| v.is_finite()))
        {
            return Err(Error::NonFinite("mlp parameters"));
        }
        Ok(Self { weights, biases, activation, output })
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![self.weights[0].ncols()];
        s.extend(self.weights.iter().map(|w| w.nrows()));
        s
    }

    pub fn n_inputs(&self) -> usize {
        self.weights[0].ncols()
    }

    pub fn n_params(&self) -> usize {
        self.weights.iter().zip(&self.biases).map(|(w, b)| w.len() + b.len()).sum()
    }

    pub fn forward_cached(&self, inputs: &DMatrix<f64>) -> Result<ForwardCache> {
        if inputs.ncols() != self.n_inputs() {
            return Err(Error::Shape(format!("mlp expects {} inputs, got {}", self.n_inputs(), inputs.ncols())));
        }
        let last = self.weights.len() - 1;
        let mut pre = Vec::with_capacity(self.weights.len());
        let mut post: Vec<DMatrix<f64>> = Vec::with_capacity(self.weights.len());
        for (l, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            let a_prev = if l == 0 { inputs } else { &post[l - 1] };
            let mut z = a_prev * w.transpose();
            for mut row in z.row_iter_mut() {
                row += b.transpose();
            }
            let a = if l == last { z.map(|v| self.output.apply(v)) } else { z.map(|v| self.activation.apply(v)) };
            pre.push(z);
            post.push(a);
        }
        Ok(ForwardCache { inputs: inputs.clone(), pre, post })
    }

    pub fn forward(&self, inputs: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        Ok(self.forward_cached(inputs)?.post.pop().expect("at least one layer"))
    }

    /// Gradients of `Σ upstream ⊙ output` given a cached forward pass.
    pub fn backward(&self, cache: &ForwardCache, upstream: &DMatrix<f64>) -> Result<MlpGradients> {
        let out = cache.output();
        if upstream.shape() != out.shape() {
            return Err(Error::Shape(format!("upstream {:?} vs output {:?}", upstream.shape(), out.shape())));
        }
        let n_layers = self.weights.len();
        let mut gw = vec![DMatrix::zeros(0, 0); n_layers];
        let mut gb = vec![DVector::zeros(0); n_layers];
        let mut delta = upstream.zip_map(out, |g, a| g * self.output.derivative(a));
        for l in (0..n_layers).rev() {
            let a_prev = if l == 0 { &cache.inputs } else { &cache.post[l - 1] };
            gw[l] = delta.transpose() * a_prev;
            gb[l] = delta.row_sum().transpose();
            if l > 0 {
                let da = &delta * &self.weights[l];
                let act = self.activation;
                delta = DMatrix::from_fn(da.nrows(), da.ncols(), |r, c| {
                    da[(r, c)] * act.derivative(cache.pre[l - 1][(r, c)], cache.post[l - 1][(r, c)])
                });
            }
        }
        Ok(MlpGradients { weights: gw, biases: gb })
    }
}

fn check_sizes(sizes: &[usize]) -> Result<()> {
    if sizes.len() < 2 || sizes.contains(&0) {
        return Err(Error::Shape(format!("invalid layer sizes {sizes:?}")));
    }
    Ok(())
}

impl Predictor for Mlp {
    fn n_outputs(&self) -> usize {
        self.weights.last().map_or(0, |w| w.nrows())
    }

    fn predict(&self, inputs: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        self.forward(inputs)
    }

    /// Per layer: weights row-major, then biases.
    fn params(&self) -> Vec<f64> {
        flatten_layers(&self.weights, &self.biases)
    }

    fn set_params(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.n_params() {
            return Err(Error::Shape(format!("expected {} parameters, got {}", self.n_params(), params.len())));
        }
        let mut at = 0;
        for (w, b) in self.weights.iter_mut().zip(&mut self.biases) {
            let (r, c) = w.shape();
            *w = DMatrix::from_row_slice(r, c, &params[at..at + r * c]);
            at += r * c;
            b.copy_from_slice(&params[at..at + r]);
            at += r;
        }
        Ok(())
    }

    fn param_gradient(&self, inputs: &DMatrix<f64>, output_grad: &DMatrix<f64>) -> Result<Vec<f64>> {
        let cache = self.forward_cached(inputs)?;
        Ok(self.backward(&cache, output_grad)?.flatten())
    }
}

#[derive(Serialize, Deserialize)]
struct LayerJson {
    rows: usize,
    cols: usize,
    weights: Vec<f64>,
    bias: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct MlpJson {
    activation: Activation,
    output: OutputActivation,
    layers: Vec<LayerJson>,
}

impl From<Mlp> for MlpJson {
    fn from(m: Mlp) -> Self {
        let layers = m
            .weights
            .iter()
            .zip(&m.biases)
            .map(|(w, b)| LayerJson {
                rows: w.nrows(),
                cols: w.ncols(),
                weights: w.transpose().iter().copied().collect(),
                bias: b.iter().copied().collect(),
            })
            .collect();
        MlpJson { activation: m.activation, output: m.output, layers }
    }
}

impl TryFrom<MlpJson> for Mlp {
    type Error = Error;

    fn try_from(j: MlpJson) -> Result<Self> {
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for l in j.layers {
            if l.weights.len() != l.rows * l.cols {
                return Err(Error::Shape(format!("layer declares {}x{} but has {} weights", l.rows, l.cols, l.weights.len())));
            }
            weights.push(DMatrix::from_row_slice(l.rows, l.cols, &l.weights));
            biases.push(DVector::from_vec(l.bias));
        }
        Mlp::from_layers(weights, biases, j.activation, j.output)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_net_outputs_zero() {
        let m = Mlp::zeros(&[3, 4, 2], Activation::Tanh, OutputActivation::Identity).unwrap();
        let out = m.forward(&DMatrix::from_element(5, 3, 1.7)).unwrap();
        assert!(out.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn identity_layer_passes_input_through() {
        let m = Mlp::from_layers(vec![DMatrix::identity(3, 3)], vec![DVector::zeros(3)], Activation::Relu, OutputActivation::Identity)
            .unwrap();
        let x = DMatrix::from_row_slice(2, 3, &[1.0, -2.0, 3.0, 0.5, 0.0, -0.1]);
        assert_eq!(m.forward(&x).unwrap(), x);
    }

    #[test]
    fn zero_upstream_gives_zero_gradient() {
        let m = Mlp::new(&[2, 3, 1], Activation::Tanh, OutputActivation::Identity, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let x = DMatrix::from_row_slice(2, 2, &[0.3, -0.2, 1.0, 0.4]);
        let g = m.param_gradient(&x, &DMatrix::zeros(2, 1)).unwrap();
        assert!(g.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn json_uses_row_major_layers() {
        let m = Mlp::new(&[2, 3, 1], Activation::Relu, OutputActivation::Sigmoid, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["layers"][0]["rows"], 3);
        assert_eq!(v["layers"][0]["weights"][1].as_f64().unwrap(), m.weights[0][(0, 1)]);
        let back: Mlp = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
    }
}
