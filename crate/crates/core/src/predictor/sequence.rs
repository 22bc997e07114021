//! Windowed sequence models, neighborhood views over prefixes, and greedy rollout.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::mlp::{Activation, Mlp, OutputActivation};
use super::Predictor;
use crate::error::{Error, Result};
use crate::witness::ArParams;

/// Predicts the next step from the trailing `window` rows of a `c`-channel
/// series. Inputs are flattened windows, oldest row first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequencePredictor {
    pub window: usize,
    pub channels: usize,
    pub mean: Mlp,
    /// Softplus-positive diagonal variance head.
    pub variance: Option<Mlp>,
}

fn softplus(z: f64) -> f64 {
    if z > 30.0 {
        z
    } else {
        z.exp().ln_1p()
    }
}

impl SequencePredictor {
    pub fn new(window: usize, channels: usize, hidden: &[usize], with_variance: bool, rng: &mut impl Rng) -> Result<Self> {
        if window == 0 || channels == 0 {
            return Err(Error::InvalidInput("window and channels must be >= 1".into()));
        }
        let mut sizes = vec![window * channels];
        sizes.extend_from_slice(hidden);
        sizes.push(channels);
        let mean = Mlp::new(&sizes, Activation::Tanh, OutputActivation::Identity, rng)?;
        let variance = if with_variance {
            Some(Mlp::new(&sizes, Activation::Tanh, OutputActivation::Identity, rng)?)
        } else {
            None
        };
        Ok(Self { window, channels, mean, variance })
    }

    /// Per-channel variances for flattened windows; `None` without a variance head.
    pub fn predict_variance(&self, inputs: &DMatrix<f64>) -> Result<Option<DMatrix<f64>>> {
        match &self.variance {
            None => Ok(None),
            Some(head) => Ok(Some(head.forward(inputs)?.map(|z| softplus(z).max(f64::MIN_POSITIVE)))),
        }
    }
}

impl Predictor for SequencePredictor {
    fn n_outputs(&self) -> usize {
        self.channels
    }

    fn predict(&self, inputs: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        self.mean.forward(inputs)
    }

    /// Mean-head parameters only; the variance head is not a game player.
    fn params(&self) -> Vec<f64> {
        self.mean.params()
    }

    fn set_params(&mut self, params: &[f64]) -> Result<()> {
        self.mean.set_params(params)
    }

    fn param_gradient(&self, inputs: &DMatrix<f64>, output_grad: &DMatrix<f64>) -> Result<Vec<f64>> {
        self.mean.param_gradient(inputs, output_grad)
    }
}

/// Anything that produces a next-step mean from the recent past.
pub trait RolloutModel {
    /// Number of trailing rows consumed.
    fn context(&self) -> usize;

    /// Next-step mean given `recent` (`context × c`, oldest first).
    fn next_mean(&self, recent: &DMatrix<f64>) -> Result<DVector<f64>>;
}

impl RolloutModel for SequencePredictor {
    fn context(&self) -> usize {
        self.window
    }

    fn next_mean(&self, recent: &DMatrix<f64>) -> Result<DVector<f64>> {
        let flat: Vec<f64> = recent.transpose().iter().copied().collect();
        let out = self.mean.forward(&DMatrix::from_row_slice(1, flat.len(), &flat))?;
        Ok(out.row(0).transpose())
    }
}

impl RolloutModel for ArParams {
    fn context(&self) -> usize {
        self.order()
    }

    fn next_mean(&self, recent: &DMatrix<f64>) -> Result<DVector<f64>> {
        let lags = crate::witness::lag_row(recent, self.order())?;
        Ok(self.predict_lagged(&lags))
    }
}

/// Feeds the model its own mean predictions for `horizon` steps after `seed`
/// (`t × c`). Returns the `horizon × c` continuation.
pub fn ar_rollout(model: &impl RolloutModel, seed: &DMatrix<f64>, horizon: usize) -> Result<DMatrix<f64>> {
    let w = model.context();
    if seed.nrows() < w {
        return Err(Error::InvalidInput(format!("seed of length {} is shorter than the model context {w}", seed.nrows())));
    }
    let c = seed.ncols();
    let mut recent = seed.rows(seed.nrows() - w, w).into_owned();
    let mut out = DMatrix::zeros(horizon, c);
    for h in 0..horizon {
        let next = model.next_mean(&recent)?;
        if next.len() != c {
            return Err(Error::Shape(format!("model emits {} channels, series has {c}", next.len())));
        }
        out.row_mut(h).copy_from(&next.transpose());
        if w > 0 {
            let shifted = recent.rows(1, w - 1).into_owned();
            recent.rows_mut(0, w - 1).copy_from(&shifted);
            recent.row_mut(w - 1).copy_from(&next.transpose());
        }
    }
    Ok(out)
}

/// One prefix `x_{0..=t}` seen through its trailing window.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceView {
    pub t: usize,
    /// Rows `t−W+1..=t` flattened, oldest first.
    pub window: Vec<f64>,
    /// `x_{t+1}`.
    pub target: Vec<f64>,
}

/// Trailing window ending at row `t`, flattened oldest first.
pub fn window_row(series: &DMatrix<f64>, t: usize, window: usize) -> Result<Vec<f64>> {
    if window == 0 || t + 1 < window || t >= series.nrows() {
        return Err(Error::InvalidInput(format!("no window of length {window} ends at {t}")));
    }
    Ok(series.rows(t + 1 - window, window).transpose().iter().copied().collect())
}

/// The prefixes `x_{0..=s}` for `s ∈ [i−ε, i+ε]`, clipped to positions that
/// have a full window behind them and a next value ahead.
pub fn sequence_neighborhood_views(series: &DMatrix<f64>, i: usize, eps: usize, window: usize) -> Result<Vec<SequenceView>> {
    let n = series.nrows();
    if window == 0 || n < window + 1 {
        return Err(Error::InvalidInput(format!("series of length {n} is too short for window {window}")));
    }
    let (lo, hi) = (window - 1, n - 2);
    if i < lo || i > hi {
        return Err(Error::InvalidInput(format!("anchor {i} outside valid range {lo}..={hi}")));
    }
    (i.saturating_sub(eps).max(lo)..=(i + eps).min(hi))
        .map(|t| {
            Ok(SequenceView {
                t,
                window: window_row(series, t, window)?,
                target: series.row(t + 1).iter().copied().collect(),
            })
        })
        .collect()
}

/// Whether a window neighborhood of radius `eps` is large enough to constrain
/// an AR(`order`) witness with an offset over `channels` channels.
pub fn ar_neighborhood_effective(eps: usize, order: usize, channels: usize) -> bool {
    2 * eps + 1 > order * channels + 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    struct Zero(usize);

    impl RolloutModel for Zero {
        fn context(&self) -> usize {
            1
        }
        fn next_mean(&self, _: &DMatrix<f64>) -> Result<DVector<f64>> {
            Ok(DVector::zeros(self.0))
        }
    }

    #[test]
    fn rollout_of_zero_model_is_zero() {
        let out = ar_rollout(&Zero(2), &DMatrix::from_element(4, 2, 1.0), 5).unwrap();
        assert_eq!(out, DMatrix::zeros(5, 2));
    }

    #[test]
    fn identity_ar_repeats_the_last_value() {
        let p = ArParams { theta_k: vec![DMatrix::identity(1, 1)], theta_0: DVector::zeros(1) };
        let seed = DMatrix::from_column_slice(3, 1, &[1.0, 2.0, 3.5]);
        let out = ar_rollout(&p, &seed, 4).unwrap();
        assert!(out.iter().all(|&v| v == 3.5));
        assert!(ar_rollout(&p, &DMatrix::zeros(0, 1), 2).is_err());
    }

    #[test]
    fn rollout_feeds_back_predictions() {
        // x_{t+1} = x_t + x_{t−1}
        let p = ArParams { theta_k: vec![DMatrix::identity(1, 1), DMatrix::identity(1, 1)], theta_0: DVector::zeros(1) };
        let out = ar_rollout(&p, &DMatrix::from_column_slice(2, 1, &[1.0, 1.0]), 4).unwrap();
        assert_eq!(out.as_slice(), &[2.0, 3.0, 5.0, 8.0]);
    }

    #[test]
    fn sequence_model_rollout_is_finite_and_deterministic() {
        let m = SequencePredictor::new(4, 2, &[8], true, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let seed = DMatrix::from_fn(80, 2, |r, c| ((r + c) as f64 * 0.4).sin());
        let a = ar_rollout(&m, &seed, 20).unwrap();
        let b = ar_rollout(&m, &seed, 20).unwrap();
        assert!(a.iter().all(|v| v.is_finite()));
        assert_eq!(a, b);
        let var = m.predict_variance(&DMatrix::from_element(3, 8, 0.2)).unwrap().unwrap();
        assert!(var.iter().all(|&v| v > 0.0));
    }

    #[test]
    fn views_are_clipped_windows() {
        let s = DMatrix::from_fn(100, 2, |r, c| (r * 2 + c) as f64);
        assert_eq!(sequence_neighborhood_views(&s, 50, 0, 5).unwrap().len(), 1);
        let v = sequence_neighborhood_views(&s, 50, 9, 5).unwrap();
        assert_eq!(v.len(), 19);
        assert_eq!(v[0].t, 41);
        assert_eq!(v[0].window, vec![74.0, 75.0, 76.0, 77.0, 78.0, 79.0, 80.0, 81.0, 82.0, 83.0]);
        assert_eq!(v[0].target, vec![84.0, 85.0]);
        assert_eq!(sequence_neighborhood_views(&s, 5, 9, 5).unwrap().len(), 11);
        assert!(sequence_neighborhood_views(&s, 2, 1, 5).is_err());
        assert!(sequence_neighborhood_views(&s, 99, 1, 5).is_err());
    }

    #[test]
    fn effectiveness_guard() {
        assert!(ar_neighborhood_effective(9, 2, 2));
        assert!(!ar_neighborhood_effective(2, 2, 2));
        assert!(ar_neighborhood_effective(3, 2, 2));
    }
}
