//! Transparency and accuracy measures, and effective-neighborhood-size checks.

mod auc;
mod bounds;

pub use auc::{auc_local, generalized_auc, generalized_auc_brute, AucLocal};
pub use bounds::{
    check_effective_size, exhaustive_tree_cost, verify_bound_linear, verify_bound_tree, EffectiveSize, LinearBoundReport,
    TreeBoundReport,
};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::neighborhood::NeighborhoodSystem;
use crate::witness::WitnessFit;

/// Mean ℓ1 distance between consecutive flattened witness parameter vectors.
pub fn witness_param_tv(params: &[Vec<f64>]) -> Result<f64> {
    if params.len() < 2 {
        return Err(Error::InvalidInput("parameter TV needs at least two time points".into()));
    }
    let len = params[0].len();
    if params.iter().any(|p| p.len() != len) {
        return Err(Error::Shape("witness parameter vectors differ in length".into()));
    }
    let total: f64 = params.windows(2).map(|w| w[0].iter().zip(&w[1]).map(|(a, b)| (a - b).abs()).sum::<f64>()).sum();
    Ok(total / (params.len() - 1) as f64)
}

/// Root mean squared coordinate difference.
pub fn deviation_rmse(f: &DMatrix<f64>, g: &DMatrix<f64>) -> Result<f64> {
    if f.shape() != g.shape() {
        return Err(Error::Shape(format!("{:?} vs {:?}", f.shape(), g.shape())));
    }
    if f.is_empty() {
        return Err(Error::InvalidInput("deviation RMSE of empty matrices".into()));
    }
    Ok(((f - g).norm_squared() / f.len() as f64).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelScores {
    pub label: usize,
    pub auc_f_y: Option<f64>,
    pub auc_g_y: Option<f64>,
    pub auc_b: Option<f64>,
    pub auc_d: Option<f64>,
}

/// Label-averaged AUC scores; labels whose reference is degenerate are left
/// out of the averages and show `None` in the breakdown.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransparencyScores {
    pub auc_f_y: f64,
    pub auc_g_y: f64,
    #[serde(rename = "auc_B")]
    pub auc_b: f64,
    #[serde(rename = "auc_D")]
    pub auc_d: f64,
    pub skipped_neighborhoods: usize,
    pub per_label: Vec<LabelScores>,
}

fn mean_some(values: impl Iterator<Item = Option<f64>>) -> f64 {
    let (sum, n) = values.flatten().fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        f64::NAN
    } else {
        sum / n as f64
    }
}

/// `targets`, `f_vals` and `anchor_witness` are `N × Q`; `witnesses[i]`
/// holds the fitted values on `B(x_i)`.
pub fn transparency_scores(
    targets: &DMatrix<f64>,
    f_vals: &DMatrix<f64>,
    anchor_witness: &DMatrix<f64>,
    witnesses: &[WitnessFit],
    ns: &NeighborhoodSystem,
) -> Result<TransparencyScores> {
    if targets.shape() != f_vals.shape() || f_vals.shape() != anchor_witness.shape() {
        return Err(Error::Shape("targets, predictions and witness values differ in shape".into()));
    }
    let mut per_label = Vec::new();
    let mut skipped = 0;
    for q in 0..targets.ncols() {
        let y: Vec<f64> = targets.column(q).iter().copied().collect();
        let f: Vec<f64> = f_vals.column(q).iter().copied().collect();
        let g: Vec<f64> = anchor_witness.column(q).iter().copied().collect();
        let local = auc_local_column(witnesses, f_vals, ns, q)?;
        skipped += local.skipped;
        per_label.push(LabelScores {
            label: q,
            auc_f_y: generalized_auc(&y, &f).ok(),
            auc_g_y: generalized_auc(&y, &g).ok(),
            auc_b: (local.evaluated > 0).then_some(local.mean),
            auc_d: generalized_auc(&f, &g).ok(),
        });
    }
    Ok(TransparencyScores {
        auc_f_y: mean_some(per_label.iter().map(|l| l.auc_f_y)),
        auc_g_y: mean_some(per_label.iter().map(|l| l.auc_g_y)),
        auc_b: mean_some(per_label.iter().map(|l| l.auc_b)),
        auc_d: mean_some(per_label.iter().map(|l| l.auc_d)),
        skipped_neighborhoods: skipped,
        per_label,
    })
}

fn auc_local_column(witnesses: &[WitnessFit], f_vals: &DMatrix<f64>, ns: &NeighborhoodSystem, q: usize) -> Result<AucLocal> {
    let f_col = f_vals.columns(q, 1).into_owned();
    let sliced: Vec<DMatrix<f64>> = witnesses.iter().map(|w| w.fitted_values.columns(q, 1).into_owned()).collect();
    auc::auc_local_values(&sliced, &f_col, ns).or_else(|e| match e {
        Error::Undefined(_) => Ok(AucLocal { mean: f64::NAN, evaluated: 0, skipped: ns.len() }),
        other => Err(other),
    })
}
