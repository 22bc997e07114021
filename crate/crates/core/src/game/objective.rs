//! Objective values and their gradients with respect to the predictor outputs.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::{Criterion, GameConfig, GameData, PrimalLoss, PROBABILITY_CLAMP};
use crate::deviation::{local_deviation, DeviationFn};
use crate::error::{Error, Result};
use crate::linalg::select_rows;
use crate::neighborhood::{verify_assumptions, NeighborhoodSystem};
use crate::witness::{WitnessFamily, WitnessFit};

/// Best response on every neighborhood at the current predictor values.
pub fn fit_witnesses(
    features: &DMatrix<f64>,
    f_vals: &DMatrix<f64>,
    ns: &NeighborhoodSystem,
    family: WitnessFamily,
) -> Result<Vec<WitnessFit>> {
    if features.nrows() != f_vals.nrows() || ns.len() != f_vals.nrows() {
        return Err(Error::Shape(format!(
            "{} feature rows, {} predictor rows, {} neighborhoods",
            features.nrows(),
            f_vals.nrows(),
            ns.len()
        )));
    }
    (0..ns.len())
        .into_par_iter()
        .map(|i| {
            let b = ns.get(i);
            family.fit(&select_rows(features, b), &select_rows(f_vals, b))
        })
        .collect()
}

/// `dev_i = (1/|B_i|) Σ_{j∈B_i} d(f_j, ĝ_i(x_j))` for every anchor.
pub fn neighborhood_deviations(
    witnesses: &[WitnessFit],
    f_vals: &DMatrix<f64>,
    ns: &NeighborhoodSystem,
    dev: DeviationFn,
) -> Result<Vec<f64>> {
    witnesses
        .iter()
        .enumerate()
        .map(|(i, w)| local_deviation(&select_rows(f_vals, ns.get(i)), &w.fitted_values, dev))
        .collect()
}

/// `ĝ_i(x_i)` for every anchor, one row each.
pub fn anchor_witness_values(
    witnesses: &[WitnessFit],
    ns: &NeighborhoodSystem,
    features: &DMatrix<f64>,
) -> DMatrix<f64> {
    let q = witnesses.first().map_or(0, |w| w.fitted_values.ncols());
    let mut out = DMatrix::zeros(witnesses.len(), q);
    for (i, w) in witnesses.iter().enumerate() {
        let row = match ns.position(i, i) {
            Some(p) => w.fitted_values.row(p).into_owned(),
            None => w.predict(&features.rows(i, 1).into_owned()).row(0).into_owned(),
        };
        out.row_mut(i).copy_from(&row);
    }
    out
}

fn clamp_prob(p: f64) -> f64 {
    p.clamp(PROBABILITY_CLAMP, 1.0 - PROBABILITY_CLAMP)
}

/// `Σ_i L(f_i, y_i)`, summed over output coordinates.
pub fn primal_loss(f_vals: &DMatrix<f64>, targets: &DMatrix<f64>, loss: PrimalLoss) -> f64 {
    match loss {
        PrimalLoss::Squared => (f_vals - targets).norm_squared(),
        PrimalLoss::CrossEntropy => f_vals
            .iter()
            .zip(targets.iter())
            .map(|(&f, &y)| {
                let p = clamp_prob(f);
                -(y * p.ln() + (1.0 - y) * (1.0 - p).ln())
            })
            .sum(),
    }
}

pub fn primal_loss_gradient(f_vals: &DMatrix<f64>, targets: &DMatrix<f64>, loss: PrimalLoss) -> DMatrix<f64> {
    match loss {
        PrimalLoss::Squared => (f_vals - targets) * 2.0,
        PrimalLoss::CrossEntropy => f_vals.zip_map(targets, |f, y| {
            let p = clamp_prob(f);
            (p - y) / (p * (1.0 - p))
        }),
    }
}

fn lambda_of(cfg: &GameConfig) -> f64 {
    cfg.criterion.strength()
}

fn row(m: &DMatrix<f64>, r: usize) -> Vec<f64> {
    m.row(r).iter().copied().collect()
}

/// Symmetric-game gradient: every witness pulls on every member of its neighborhood.
pub fn symmetric_gradient(
    f_vals: &DMatrix<f64>,
    targets: &DMatrix<f64>,
    witnesses: &[WitnessFit],
    ns: &NeighborhoodSystem,
    cfg: &GameConfig,
) -> DMatrix<f64> {
    let lambda = lambda_of(cfg);
    let mut grad = primal_loss_gradient(f_vals, targets, cfg.primal_loss);
    add_neighborhood_pull(&mut grad, f_vals, witnesses, ns, cfg.deviation, |_| lambda);
    grad
}

/// Adds `Σ_i w_i ∇_f dev_i` with the witnesses held fixed.
pub(crate) fn add_neighborhood_pull(
    grad: &mut DMatrix<f64>,
    f_vals: &DMatrix<f64>,
    witnesses: &[WitnessFit],
    ns: &NeighborhoodSystem,
    dev: DeviationFn,
    weight: impl Fn(usize) -> f64,
) {
    let q = f_vals.ncols();
    let mut buf = vec![0.0; q];
    for (i, w) in witnesses.iter().enumerate() {
        let b = ns.get(i);
        let scale = weight(i) / b.len() as f64;
        if scale == 0.0 {
            continue;
        }
        for (p, &j) in b.iter().enumerate() {
            dev.grad_f(&row(f_vals, j), &row(&w.fitted_values, p), &mut buf);
            for c in 0..q {
                grad[(j, c)] += scale * buf[c];
            }
        }
    }
}

/// Asymmetric-game gradient: each anchor only sees its own witness at itself.
pub fn asymmetric_gradient(
    f_vals: &DMatrix<f64>,
    targets: &DMatrix<f64>,
    anchor_values: &DMatrix<f64>,
    cfg: &GameConfig,
) -> DMatrix<f64> {
    let lambda = lambda_of(cfg);
    let mut grad = primal_loss_gradient(f_vals, targets, cfg.primal_loss);
    let mut buf = vec![0.0; f_vals.ncols()];
    for i in 0..f_vals.nrows() {
        cfg.deviation.grad_f(&row(f_vals, i), &row(anchor_values, i), &mut buf);
        for (c, g) in buf.iter().enumerate() {
            grad[(i, c)] += lambda * g;
        }
    }
    grad
}

/// `N̄_i` and `ḡ_i` of the anchor-local form of the symmetric game.
#[derive(Debug, Clone, PartialEq)]
pub struct AdjustedTarget {
    pub n_bar: f64,
    pub g_bar: DVector<f64>,
}

/// `N̄_i = Σ_{t∈B_i} 1/|B_t|`, `ḡ_i = Σ_{t∈B_i} ĝ_t(x_i)/|B_t|`.
/// Requires symmetric membership and full coverage.
pub fn compute_adjusted_targets(witnesses: &[WitnessFit], ns: &NeighborhoodSystem) -> Result<Vec<AdjustedTarget>> {
    if witnesses.len() != ns.len() {
        return Err(Error::Shape(format!("{} witnesses for {} neighborhoods", witnesses.len(), ns.len())));
    }
    let report = verify_assumptions(ns, true, true);
    if !report.a4 {
        return Err(Error::Assumption { assumption: "A4", detail: "neighborhood membership is not symmetric".into() });
    }
    if !report.a5 {
        return Err(Error::Assumption { assumption: "A5", detail: "neighborhoods do not cover every anchor".into() });
    }
    let q = witnesses.first().map_or(0, |w| w.fitted_values.ncols());
    let sizes = ns.sizes();
    (0..ns.len())
        .map(|i| {
            let mut n_bar = 0.0;
            let mut g_bar = DVector::zeros(q);
            for &t in ns.get(i) {
                let inv = 1.0 / sizes[t] as f64;
                let p = ns.position(t, i).expect("symmetric membership");
                n_bar += inv;
                g_bar += witnesses[t].fitted_values.row(p).transpose() * inv;
            }
            Ok(AdjustedTarget { n_bar, g_bar })
        })
        .collect()
}

/// `∇L + 2λ(N̄_i f_i − ḡ_i)`.
pub fn adjusted_gradient(
    f_vals: &DMatrix<f64>,
    targets: &DMatrix<f64>,
    adjusted: &[AdjustedTarget],
    cfg: &GameConfig,
) -> DMatrix<f64> {
    let lambda = lambda_of(cfg);
    let mut grad = primal_loss_gradient(f_vals, targets, cfg.primal_loss);
    for (i, a) in adjusted.iter().enumerate() {
        for c in 0..f_vals.ncols() {
            grad[(i, c)] += 2.0 * lambda * (a.n_bar * f_vals[(i, c)] - a.g_bar[c]);
        }
    }
    grad
}

pub(crate) fn symmetric_value(
    f_vals: &DMatrix<f64>,
    targets: &DMatrix<f64>,
    witnesses: &[WitnessFit],
    ns: &NeighborhoodSystem,
    cfg: &GameConfig,
) -> Result<f64> {
    let devs = neighborhood_deviations(witnesses, f_vals, ns, cfg.deviation)?;
    Ok(primal_loss(f_vals, targets, cfg.primal_loss) + lambda_of(cfg) * devs.iter().sum::<f64>())
}

pub(crate) fn asymmetric_value(
    f_vals: &DMatrix<f64>,
    targets: &DMatrix<f64>,
    anchor_values: &DMatrix<f64>,
    cfg: &GameConfig,
) -> Result<f64> {
    let mut pen = 0.0;
    for i in 0..f_vals.nrows() {
        pen += cfg.deviation.eval(&row(f_vals, i), &row(anchor_values, i))?;
    }
    Ok(primal_loss(f_vals, targets, cfg.primal_loss) + lambda_of(cfg) * pen)
}

pub(crate) fn adjusted_value(
    f_vals: &DMatrix<f64>,
    targets: &DMatrix<f64>,
    adjusted: &[AdjustedTarget],
    cfg: &GameConfig,
) -> f64 {
    let mut pen = 0.0;
    for (i, a) in adjusted.iter().enumerate() {
        let r: f64 = (0..f_vals.ncols()).map(|c| (a.n_bar * f_vals[(i, c)] - a.g_bar[c]).powi(2)).sum();
        pen += r / a.n_bar;
    }
    primal_loss(f_vals, targets, cfg.primal_loss) + lambda_of(cfg) * pen
}

fn check_f(f_vals: &DMatrix<f64>, data: &GameData) -> Result<()> {
    if f_vals.shape() != data.targets.shape() {
        return Err(Error::Shape(format!("predictor values {:?} vs targets {:?}", f_vals.shape(), data.targets.shape())));
    }
    Ok(())
}

/// Symmetric-game objective with witnesses refit at `f_vals`.
pub fn eval_symmetric_objective(f_vals: &DMatrix<f64>, data: &GameData, ns: &NeighborhoodSystem, cfg: &GameConfig) -> Result<f64> {
    check_f(f_vals, data)?;
    let ws = fit_witnesses(&data.features, f_vals, ns, cfg.witness)?;
    symmetric_value(f_vals, &data.targets, &ws, ns, cfg)
}

/// Asymmetric-game objective with each anchor's witness at its best response.
pub fn eval_asymmetric_objective(f_vals: &DMatrix<f64>, data: &GameData, ns: &NeighborhoodSystem, cfg: &GameConfig) -> Result<f64> {
    check_f(f_vals, data)?;
    let ws = fit_witnesses(&data.features, f_vals, ns, cfg.witness)?;
    asymmetric_value(f_vals, &data.targets, &anchor_witness_values(&ws, ns, &data.features), cfg)
}

/// Adjusted symmetric objective with witnesses refit at `f_vals`.
pub fn eval_adjusted_objective(f_vals: &DMatrix<f64>, data: &GameData, ns: &NeighborhoodSystem, cfg: &GameConfig) -> Result<f64> {
    check_f(f_vals, data)?;
    let ws = fit_witnesses(&data.features, f_vals, ns, cfg.witness)?;
    let adj = compute_adjusted_targets(&ws, ns)?;
    Ok(adjusted_value(f_vals, &data.targets, &adj, cfg))
}

pub(crate) fn objective_for(
    criterion: Criterion,
    f_vals: &DMatrix<f64>,
    data: &GameData,
    ws: &[WitnessFit],
    ns: &NeighborhoodSystem,
    cfg: &GameConfig,
) -> Result<f64> {
    match criterion {
        Criterion::Symmetric { .. } | Criterion::Uniform { .. } => symmetric_value(f_vals, &data.targets, ws, ns, cfg),
        Criterion::Asymmetric { .. } => {
            asymmetric_value(f_vals, &data.targets, &anchor_witness_values(ws, ns, &data.features), cfg)
        }
        Criterion::AdjustedSymmetric { .. } => {
            Ok(adjusted_value(f_vals, &data.targets, &compute_adjusted_targets(ws, ns)?, cfg))
        }
    }
}
