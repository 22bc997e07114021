//! Seeded synthetic data.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, FeatureKind};
use crate::error::{Error, Result};
use crate::witness::ArParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SynthSpec {
    /// Sorted grid on `[0, 1]` with a kinked curve plus Gaussian noise.
    Curve1d { n: usize, noise: f64 },
    /// `c` channels, each a period-5 plus a period-20 sinusoid plus noise.
    Sinusoid { length: usize, channels: usize, noise: f64 },
    /// Binary features; each label is a conjunction of two features, flipped
    /// with probability `flip`.
    Multilabel { n: usize, features: usize, labels: usize, flip: f64 },
    /// A stable AR(`order`) process with random coefficients.
    Ar { length: usize, channels: usize, order: usize, noise: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub t: Vec<f64>,
    /// `length × c`.
    pub values: DMatrix<f64>,
}

impl Series {
    pub fn new(values: DMatrix<f64>) -> Self {
        Self { t: (0..values.nrows()).map(|i| i as f64).collect(), values }
    }

    pub fn len(&self) -> usize {
        self.values.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.values.nrows() == 0
    }

    pub fn channels(&self) -> usize {
        self.values.ncols()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SynthData {
    Dataset(Dataset),
    Series { series: Series, ar: Option<ArParams> },
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// The noiseless curve behind [`SynthSpec::Curve1d`].
pub fn curve_1d(x: f64) -> f64 {
    let ramp = if x < 0.4 { 2.0 * x } else { 0.8 - 1.5 * (x - 0.4) };
    ramp + 0.25 * (3.0 * PI * x).sin()
}

pub fn gen_synth(spec: &SynthSpec, seed: u64) -> Result<SynthData> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match *spec {
        SynthSpec::Curve1d { n, noise } => {
            if n < 2 || !(noise >= 0.0) {
                return Err(Error::InvalidInput("curve needs n >= 2 and noise >= 0".into()));
            }
            let x = DMatrix::from_fn(n, 1, |r, _| r as f64 / (n - 1) as f64);
            let y = DMatrix::from_fn(n, 1, |r, _| curve_1d(x[(r, 0)]));
            let y = y.map(|v| v + noise * normal(&mut rng));
            Ok(SynthData::Dataset(Dataset::continuous(x, y)?))
        }
        SynthSpec::Sinusoid { length, channels, noise } => {
            if length == 0 || channels == 0 || !(noise >= 0.0) {
                return Err(Error::InvalidInput("sinusoid needs length, channels >= 1 and noise >= 0".into()));
            }
            let phases: Vec<(f64, f64)> =
                (0..channels).map(|_| (rng.random::<f64>() * 2.0 * PI, rng.random::<f64>() * 2.0 * PI)).collect();
            let mut values = DMatrix::zeros(length, channels);
            for t in 0..length {
                for (c, &(p5, p20)) in phases.iter().enumerate() {
                    let tt = t as f64;
                    values[(t, c)] =
                        0.5 * (2.0 * PI * tt / 5.0 + p5).sin() + (2.0 * PI * tt / 20.0 + p20).sin() + noise * normal(&mut rng);
                }
            }
            Ok(SynthData::Series { series: Series::new(values), ar: None })
        }
        SynthSpec::Multilabel { n, features, labels, flip } => {
            if n == 0 || features < 2 || labels == 0 || !(0.0..=1.0).contains(&flip) {
                return Err(Error::InvalidInput("multilabel needs n >= 1, features >= 2, labels >= 1, flip in [0,1]".into()));
            }
            let pairs: Vec<(usize, usize)> = (0..labels)
                .map(|_| {
                    let a = rng.random_range(0..features);
                    let mut b = rng.random_range(0..features - 1);
                    if b >= a {
                        b += 1;
                    }
                    (a, b)
                })
                .collect();
            let x = DMatrix::from_fn(n, features, |_, _| if rng.random::<bool>() { 1.0 } else { 0.0 });
            let y = DMatrix::from_fn(n, labels, |r, q| {
                let (a, b) = pairs[q];
                let v = x[(r, a)] * x[(r, b)];
                if rng.random::<f64>() < flip {
                    1.0 - v
                } else {
                    v
                }
            });
            Ok(SynthData::Dataset(Dataset::new(x, y, vec![FeatureKind::Binary; features])?))
        }
        SynthSpec::Ar { length, channels, order, noise } => {
            if length <= order || channels == 0 || order == 0 || !(noise >= 0.0) {
                return Err(Error::InvalidInput("AR needs length > order >= 1, channels >= 1, noise >= 0".into()));
            }
            let params = random_stable_ar(&mut rng, order, channels);
            let mut values = DMatrix::zeros(length, channels);
            for t in 0..order {
                for c in 0..channels {
                    values[(t, c)] = normal(&mut rng);
                }
            }
            for t in order..length {
                let lags: Vec<f64> = (0..order).flat_map(|k| values.row(t - 1 - k).iter().copied().collect::<Vec<_>>()).collect();
                let next = params.predict_lagged(&lags);
                for c in 0..channels {
                    values[(t, c)] = next[c] + noise * normal(&mut rng);
                }
            }
            Ok(SynthData::Series { series: Series::new(values), ar: Some(params) })
        }
    }
}

fn spectral_radius(params: &ArParams) -> f64 {
    let (k, c) = (params.order(), params.channels());
    let mut companion = DMatrix::zeros(k * c, k * c);
    for (i, theta) in params.theta_k.iter().enumerate() {
        companion.view_mut((0, i * c), (c, c)).copy_from(theta);
    }
    for i in c..k * c {
        companion[(i, i - c)] = 1.0;
    }
    companion.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Coefficients whose companion matrix has spectral radius in `[0.85, 0.98]`,
/// so sequences neither explode nor die out quickly.
fn random_stable_ar(rng: &mut ChaCha8Rng, order: usize, channels: usize) -> ArParams {
    loop {
        let theta_k: Vec<DMatrix<f64>> =
            (0..order).map(|_| DMatrix::from_fn(channels, channels, |_, _| rng.random::<f64>() * 2.0 - 1.0)).collect();
        let theta_0 = DVector::from_fn(channels, |_, _| rng.random::<f64>() * 0.4 - 0.2);
        let mut p = ArParams { theta_k, theta_0 };
        let rho = spectral_radius(&p);
        if rho < 1e-3 {
            continue;
        }
        let target = 0.85 + 0.13 * rng.random::<f64>();
        // Scaling θ_k by s^k scales every companion eigenvalue by s.
        let s = target / rho;
        for (k, theta) in p.theta_k.iter_mut().enumerate() {
            *theta *= s.powi(k as i32 + 1);
        }
        if (spectral_radius(&p) - target).abs() < 1e-6 {
            return p;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(spec: &SynthSpec, seed: u64) -> (Series, Option<ArParams>) {
        match gen_synth(spec, seed).unwrap() {
            SynthData::Series { series, ar } => (series, ar),
            SynthData::Dataset(_) => panic!("expected a series"),
        }
    }

    #[test]
    fn fixed_seed_is_bit_identical() {
        for spec in [
            SynthSpec::Curve1d { n: 30, noise: 0.1 },
            SynthSpec::Sinusoid { length: 50, channels: 2, noise: 0.1 },
            SynthSpec::Multilabel { n: 20, features: 6, labels: 3, flip: 0.1 },
            SynthSpec::Ar { length: 40, channels: 2, order: 2, noise: 0.1 },
        ] {
            assert_eq!(gen_synth(&spec, 9).unwrap(), gen_synth(&spec, 9).unwrap());
            assert_ne!(gen_synth(&spec, 9).unwrap(), gen_synth(&spec, 10).unwrap());
        }
    }

    #[test]
    fn ar_generator_is_stable() {
        let (s, ar) = series(&SynthSpec::Ar { length: 500, channels: 3, order: 2, noise: 0.0 }, 1);
        assert!(s.values.iter().all(|v| v.is_finite() && v.abs() < 1e3));
        let rho = spectral_radius(&ar.unwrap());
        assert!((0.85..=0.98 + 1e-6).contains(&rho));
    }

    #[test]
    fn multilabel_is_binary() {
        let SynthData::Dataset(d) = gen_synth(&SynthSpec::Multilabel { n: 50, features: 5, labels: 2, flip: 0.0 }, 3).unwrap() else {
            panic!()
        };
        assert!(d.inputs().iter().chain(d.targets().iter()).all(|&v| v == 0.0 || v == 1.0));
    }

    #[test]
    fn invalid_specs_are_rejected() {
        assert!(gen_synth(&SynthSpec::Curve1d { n: 1, noise: 0.0 }, 0).is_err());
        assert!(gen_synth(&SynthSpec::Ar { length: 2, channels: 1, order: 2, noise: 0.0 }, 0).is_err());
        assert!(gen_synth(&SynthSpec::Multilabel { n: 5, features: 1, labels: 1, flip: 0.0 }, 0).is_err());
    }

    #[test]
    fn noiseless_ar_is_recovered_by_fit() {
        let (s, ar) = series(&SynthSpec::Ar { length: 60, channels: 2, order: 2, noise: 0.0 }, 4);
        let ar = ar.unwrap();
        let histories: Vec<DMatrix<f64>> = (1..59).map(|t| s.values.rows(0, t + 1).into_owned()).collect();
        let mu = s.values.rows(2, 58).into_owned();
        let fit = crate::witness::fit_ar_params(&histories, &mu, 2, 0.0).unwrap();
        for (a, b) in fit.flatten().iter().zip(ar.flatten()) {
            assert!((a - b).abs() < 1e-4, "{a} vs {b}");
        }
    }

    fn autocorrelation(x: &[f64], lag: usize) -> f64 {
        let m = x.iter().sum::<f64>() / x.len() as f64;
        let num: f64 = (0..x.len() - lag).map(|t| (x[t] - m) * (x[t + lag] - m)).sum();
        num / x.iter().map(|v| (v - m).powi(2)).sum::<f64>()
    }

    #[test]
    fn sinusoid_has_periods_five_and_twenty() {
        let (s, _) = series(&SynthSpec::Sinusoid { length: 2000, channels: 2, noise: 0.1 }, 8);
        for c in 0..2 {
            let x: Vec<f64> = s.values.column(c).iter().copied().collect();
            let ac: Vec<f64> = (0..=25).map(|l| autocorrelation(&x, l)).collect();
            // Differencing damps the slow component so the fast period shows.
            let dx: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
            let fast = (2..=8).max_by(|&a, &b| autocorrelation(&dx, a).total_cmp(&autocorrelation(&dx, b))).unwrap();
            assert_eq!(fast, 5);
            let best = (11..=25).max_by(|&a, &b| ac[a].total_cmp(&ac[b])).unwrap();
            assert_eq!(best, 20);
        }
    }
}
