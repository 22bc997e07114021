//! Deviation functions `d(y, y')` and the neighborhood-averaged local deviation.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A per-row discrepancy between predictor and witness outputs.
///
/// Multi-dimensional outputs are summed over coordinates. For
/// `KlDiagGaussian` a row holds `[μ_1..μ_Q, σ²_1..σ²_Q]` and the value is
/// `KL(witness ‖ predictor)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeviationFn {
    #[default]
    Squared,
    TotalVariation,
    KlDiagGaussian,
}

impl DeviationFn {
    /// `d(f, g)` for one output row.
    pub fn eval(self, f: &[f64], g: &[f64]) -> Result<f64> {
        if f.len() != g.len() {
            return Err(Error::Shape(format!("deviation of rows of width {} and {}", f.len(), g.len())));
        }
        Ok(match self {
            DeviationFn::Squared => f.iter().zip(g).map(|(a, b)| (a - b) * (a - b)).sum(),
            DeviationFn::TotalVariation => f.iter().zip(g).map(|(a, b)| (a - b).abs()).sum(),
            DeviationFn::KlDiagGaussian => {
                let (mu_f, var_f) = split_gaussian(f)?;
                let (mu_g, var_g) = split_gaussian(g)?;
                kl_diag_gaussian(mu_g, var_g, mu_f, var_f)?
            }
        })
    }

    /// `∂d(f, g)/∂f`, written into `out`. Total variation uses the subgradient
    /// `sign(f − g)` with 0 at ties.
    pub fn grad_f(self, f: &[f64], g: &[f64], out: &mut [f64]) {
        match self {
            DeviationFn::Squared => {
                for ((o, a), b) in out.iter_mut().zip(f).zip(g) {
                    *o = 2.0 * (a - b);
                }
            }
            DeviationFn::TotalVariation => {
                for ((o, a), b) in out.iter_mut().zip(f).zip(g) {
                    let diff = a - b;
                    *o = if diff > 0.0 {
                        1.0
                    } else if diff < 0.0 {
                        -1.0
                    } else {
                        0.0
                    };
                }
            }
            DeviationFn::KlDiagGaussian => {
                let q = f.len() / 2;
                for k in 0..q {
                    let (mf, vf) = (f[k], f[q + k]);
                    let (mg, vg) = (g[k], g[q + k]);
                    out[k] = (mf - mg) / vf;
                    out[q + k] = 0.5 * (1.0 / vf - (vg + (mg - mf) * (mg - mf)) / (vf * vf));
                }
            }
        }
    }
}

fn split_gaussian(row: &[f64]) -> Result<(&[f64], &[f64])> {
    if row.len() % 2 != 0 {
        return Err(Error::Shape(format!("gaussian row width {} is not even", row.len())));
    }
    Ok(row.split_at(row.len() / 2))
}

/// `KL(N(μ₁, diag σ²₁) ‖ N(μ₂, diag σ²₂))`.
pub fn kl_diag_gaussian(mu1: &[f64], var1: &[f64], mu2: &[f64], var2: &[f64]) -> Result<f64> {
    let q = mu1.len();
    if var1.len() != q || mu2.len() != q || var2.len() != q {
        return Err(Error::Shape("kl_diag_gaussian arguments differ in length".into()));
    }
    if var1.iter().chain(var2).any(|&v| !(v > 0.0)) {
        return Err(Error::InvalidInput("variances must be strictly positive".into()));
    }
    Ok((0..q)
        .map(|k| {
            let diff = mu1[k] - mu2[k];
            0.5 * ((var2[k] / var1[k]).ln() + (var1[k] + diff * diff) / var2[k] - 1.0)
        })
        .sum())
}

/// `(1/m) Σ_j d(f(x_j), g(x_j))` over the `m` rows of a neighborhood.
pub fn local_deviation(f_vals: &DMatrix<f64>, witness_vals: &DMatrix<f64>, dev: DeviationFn) -> Result<f64> {
    if f_vals.shape() != witness_vals.shape() {
        return Err(Error::Shape(format!(
            "predictor values {:?} vs witness values {:?}",
            f_vals.shape(),
            witness_vals.shape()
        )));
    }
    let m = f_vals.nrows();
    if m == 0 {
        return Err(Error::InvalidInput("empty neighborhood".into()));
    }
    let mut total = 0.0;
    let mut fr = vec![0.0; f_vals.ncols()];
    let mut gr = vec![0.0; f_vals.ncols()];
    for r in 0..m {
        for c in 0..f_vals.ncols() {
            fr[c] = f_vals[(r, c)];
            gr[c] = witness_vals[(r, c)];
        }
        total += dev.eval(&fr, &gr)?;
    }
    Ok(total / m as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn worked_examples() {
        let f = DMatrix::from_row_slice(2, 1, &[0.0, 2.0]);
        let g = DMatrix::from_row_slice(2, 1, &[1.0, 1.0]);
        assert_eq!(local_deviation(&f, &f, DeviationFn::Squared).unwrap(), 0.0);
        assert_eq!(local_deviation(&f, &g, DeviationFn::Squared).unwrap(), 1.0);
        assert_eq!(local_deviation(&f, &g, DeviationFn::TotalVariation).unwrap(), 1.0);
    }

    #[test]
    fn shape_mismatch_is_error() {
        let f = DMatrix::zeros(2, 1);
        let g = DMatrix::zeros(3, 1);
        assert!(matches!(local_deviation(&f, &g, DeviationFn::Squared), Err(Error::Shape(_))));
    }

    #[test]
    fn kl_closed_form_values() {
        assert_eq!(kl_diag_gaussian(&[0.3], &[2.0], &[0.3], &[2.0]).unwrap(), 0.0);
        assert!((kl_diag_gaussian(&[0.0], &[1.0], &[1.0], &[1.0]).unwrap() - 0.5).abs() < 1e-15);
        let expected = 0.5 * (2f64.ln() + 0.5 - 1.0);
        let got = kl_diag_gaussian(&[0.0], &[1.0], &[0.0], &[2.0]).unwrap();
        assert!((got - expected).abs() < 1e-15);
        assert!((got - 0.09657).abs() < 1e-5);
        assert!(kl_diag_gaussian(&[0.0], &[0.0], &[0.0], &[1.0]).is_err());
    }

    #[test]
    fn gradients_match_finite_differences() {
        let f = [0.3, -1.2, 0.7, 1.9];
        let g = [-0.4, 0.5, 1.3, 0.6];
        for dev in [DeviationFn::Squared, DeviationFn::TotalVariation, DeviationFn::KlDiagGaussian] {
            let mut grad = [0.0; 4];
            dev.grad_f(&f, &g, &mut grad);
            for k in 0..4 {
                let h = 1e-6;
                let mut fp = f;
                let mut fm = f;
                fp[k] += h;
                fm[k] -= h;
                let fd = (dev.eval(&fp, &g).unwrap() - dev.eval(&fm, &g).unwrap()) / (2.0 * h);
                assert!((fd - grad[k]).abs() < 1e-6, "{dev:?} coord {k}: {fd} vs {}", grad[k]);
            }
        }
    }

    proptest! {
        #[test]
        fn nonnegative_and_zero_iff_equal(
            a in proptest::collection::vec(-3.0f64..3.0, 4),
            b in proptest::collection::vec(-3.0f64..3.0, 4),
            va in proptest::collection::vec(0.1f64..3.0, 4),
            vb in proptest::collection::vec(0.1f64..3.0, 4),
        ) {
            let f = DMatrix::from_row_slice(2, 2, &a);
            let g = DMatrix::from_row_slice(2, 2, &b);
            for dev in [DeviationFn::Squared, DeviationFn::TotalVariation] {
                let d = local_deviation(&f, &g, dev).unwrap();
                prop_assert!(d >= 0.0);
                prop_assert_eq!(local_deviation(&f, &f, dev).unwrap(), 0.0);
                if crate::linalg::max_abs_diff(&f, &g) > 1e-12 {
                    prop_assert!(d > 0.0);
                }
            }
            let fg = DMatrix::from_row_slice(1, 4, &[a[0], a[1], va[0], va[1]]);
            let gg = DMatrix::from_row_slice(1, 4, &[b[0], b[1], vb[0], vb[1]]);
            let kl = local_deviation(&fg, &gg, DeviationFn::KlDiagGaussian).unwrap();
            prop_assert!(kl >= -1e-15);
            prop_assert!(local_deviation(&fg, &fg, DeviationFn::KlDiagGaussian).unwrap().abs() < 1e-15);
        }
    }
}
