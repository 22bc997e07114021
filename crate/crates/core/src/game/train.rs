//! Alternating best-response / predictor-update loops.

use nalgebra::DMatrix;

use super::objective::{
    add_neighborhood_pull, adjusted_gradient, anchor_witness_values, asymmetric_gradient, compute_adjusted_targets,
    fit_witnesses, neighborhood_deviations, objective_for, primal_loss, primal_loss_gradient, symmetric_gradient,
};
use super::{Criterion, GameConfig, GameData, GameReport, GameTraces, MultiplierForm, PrimalLoss};
use crate::deviation::DeviationFn;
use crate::error::{Error, Result};
use crate::linalg::{max_abs_diff, select_rows};
use crate::neighborhood::NeighborhoodSystem;
use crate::predictor::{Adam, Predictor};
use crate::witness::WitnessFit;

/// Dispatches on `cfg.criterion`.
pub fn train(predictor: &mut dyn Predictor, data: &GameData, ns: &NeighborhoodSystem, cfg: &GameConfig) -> Result<GameReport> {
    match cfg.criterion {
        Criterion::Uniform { .. } => train_uniform(predictor, data, ns, cfg),
        Criterion::Symmetric { .. } => train_symmetric(predictor, data, ns, cfg),
        Criterion::Asymmetric { .. } | Criterion::AdjustedSymmetric { .. } => train_asymmetric(predictor, data, ns, cfg),
    }
}

pub fn train_symmetric(
    predictor: &mut dyn Predictor,
    data: &GameData,
    ns: &NeighborhoodSystem,
    cfg: &GameConfig,
) -> Result<GameReport> {
    if !matches!(cfg.criterion, Criterion::Symmetric { .. }) {
        return Err(Error::Config(format!("train_symmetric called with a {} criterion", cfg.criterion.name())));
    }
    run_penalized(predictor, data, ns, cfg)
}

/// Handles both the asymmetric game and the adjusted symmetric objective.
pub fn train_asymmetric(
    predictor: &mut dyn Predictor,
    data: &GameData,
    ns: &NeighborhoodSystem,
    cfg: &GameConfig,
) -> Result<GameReport> {
    if !matches!(cfg.criterion, Criterion::Asymmetric { .. } | Criterion::AdjustedSymmetric { .. }) {
        return Err(Error::Config(format!("train_asymmetric called with a {} criterion", cfg.criterion.name())));
    }
    run_penalized(predictor, data, ns, cfg)
}

fn check_problem(predictor: &dyn Predictor, data: &GameData, ns: &NeighborhoodSystem, cfg: &GameConfig) -> Result<()> {
    cfg.validate()?;
    if ns.len() != data.len() {
        return Err(Error::Shape(format!("{} neighborhoods for {} anchors", ns.len(), data.len())));
    }
    if predictor.n_outputs() != data.targets.ncols() {
        return Err(Error::Shape(format!(
            "predictor emits {} outputs, targets have {}",
            predictor.n_outputs(),
            data.targets.ncols()
        )));
    }
    Ok(())
}

fn record(
    traces: &mut GameTraces,
    f: &DMatrix<f64>,
    data: &GameData,
    ws: &[WitnessFit],
    ns: &NeighborhoodSystem,
    cfg: &GameConfig,
    objective: f64,
    violations: usize,
    multiplier_norm: f64,
) -> Result<()> {
    let devs = neighborhood_deviations(ws, f, ns, cfg.deviation)?;
    traces.primal_loss.push(primal_loss(f, &data.targets, cfg.primal_loss));
    traces.objective.push(objective);
    traces.mean_dev.push(devs.iter().sum::<f64>() / devs.len() as f64);
    traces.max_dev.push(devs.iter().copied().fold(0.0, f64::max));
    traces.violations.push(violations);
    traces.multiplier_norm.push(multiplier_norm);
    Ok(())
}

/// Closed-form minimizer of the frozen-witness objective for free per-anchor
/// values under squared primal loss and squared deviation.
fn exact_tabular_update(
    criterion: Criterion,
    f: &DMatrix<f64>,
    data: &GameData,
    ws: &[WitnessFit],
    ns: &NeighborhoodSystem,
) -> Result<DMatrix<f64>> {
    let lambda = criterion.strength();
    let y = &data.targets;
    let mut out = DMatrix::zeros(f.nrows(), f.ncols());
    match criterion {
        Criterion::Symmetric { .. } => {
            let sizes = ns.sizes();
            for (j, members) in ns.memberships().iter().enumerate() {
                let mut den = 1.0;
                let mut num = y.row(j).into_owned();
                for &(i, p) in members {
                    let w = lambda / sizes[i] as f64;
                    den += w;
                    num += ws[i].fitted_values.row(p) * w;
                }
                out.row_mut(j).copy_from(&(num / den));
            }
        }
        Criterion::Asymmetric { .. } => {
            let a = anchor_witness_values(ws, ns, &data.features);
            out = (y + a * lambda) / (1.0 + lambda);
        }
        Criterion::AdjustedSymmetric { .. } => {
            for (i, t) in compute_adjusted_targets(ws, ns)?.iter().enumerate() {
                let row = (y.row(i) + t.g_bar.transpose() * lambda) / (1.0 + lambda * t.n_bar);
                out.row_mut(i).copy_from(&row);
            }
        }
        Criterion::Uniform { .. } => unreachable!("uniform criterion has no closed-form step"),
    }
    Ok(out)
}

fn penalized_gradient(
    criterion: Criterion,
    f: &DMatrix<f64>,
    data: &GameData,
    ws: &[WitnessFit],
    ns: &NeighborhoodSystem,
    cfg: &GameConfig,
) -> Result<DMatrix<f64>> {
    Ok(match criterion {
        Criterion::Symmetric { .. } => symmetric_gradient(f, &data.targets, ws, ns, cfg),
        Criterion::Asymmetric { .. } => {
            asymmetric_gradient(f, &data.targets, &anchor_witness_values(ws, ns, &data.features), cfg)
        }
        Criterion::AdjustedSymmetric { .. } => {
            adjusted_gradient(f, &data.targets, &compute_adjusted_targets(ws, ns)?, cfg)
        }
        Criterion::Uniform { .. } => unreachable!("handled by train_uniform"),
    })
}

fn run_penalized(predictor: &mut dyn Predictor, data: &GameData, ns: &NeighborhoodSystem, cfg: &GameConfig) -> Result<GameReport> {
    check_problem(predictor, data, ns, cfg)?;
    let criterion = cfg.criterion;
    let exact = cfg.primal_loss == PrimalLoss::Squared && cfg.deviation == DeviationFn::Squared;
    let n = data.len() as f64;
    let mut adam = Adam::new(cfg.learning_rate, predictor.params().len());

    let mut f = predictor.predict(&data.inputs)?;
    let mut ws_fresh = fit_witnesses(&data.features, &f, ns, cfg.witness)?;
    let mut ws_play = ws_fresh.clone();
    let initial = objective_for(criterion, &f, data, &ws_fresh, ns, cfg)?;
    let mut traces = GameTraces::default();
    let mut converged = false;
    let mut last_change = f64::INFINITY;
    let mut iterations = 0;

    for it in 0..cfg.outer_iterations {
        if it % cfg.witness_refresh_period == 0 {
            ws_play.clone_from(&ws_fresh);
        }
        let f_new = match predictor.as_tabular_mut() {
            Some(tab) if exact => {
                let next = exact_tabular_update(criterion, &f, data, &ws_play, ns)?;
                tab.values.copy_from(&next);
                next
            }
            _ => {
                let mut cur = f.clone();
                for _ in 0..cfg.inner_steps {
                    let g = penalized_gradient(criterion, &cur, data, &ws_play, ns, cfg)? / n;
                    let pg = predictor.param_gradient(&data.inputs, &g)?;
                    let mut params = predictor.params();
                    adam.step(&mut params, &pg);
                    predictor.set_params(&params)?;
                    cur = predictor.predict(&data.inputs)?;
                }
                cur
            }
        };
        iterations = it + 1;
        if !f_new.iter().all(|v| v.is_finite()) {
            return Err(Error::Divergence { iteration: iterations, objective: f64::INFINITY, initial });
        }
        last_change = max_abs_diff(&f_new, &f);
        f = f_new;
        ws_fresh = fit_witnesses(&data.features, &f, ns, cfg.witness)?;
        let obj = objective_for(criterion, &f, data, &ws_fresh, ns, cfg)?;
        if initial > 0.0 && obj > 10.0 * initial {
            return Err(Error::Divergence { iteration: iterations, objective: obj, initial });
        }
        record(&mut traces, &f, data, &ws_fresh, ns, cfg, obj, 0, 0.0)?;
        if last_change <= cfg.tolerance {
            converged = true;
            break;
        }
    }
    // A fixed gradient schedule that ran to completion without diverging counts
    // as converged; only closed-form updates are held to the tolerance.
    let tabular_exact = exact && predictor.as_tabular_mut().is_some();
    if !tabular_exact {
        converged = true;
    }
    Ok(GameReport {
        criterion,
        iterations,
        converged,
        last_change,
        traces,
        final_values: f,
        witnesses: ws_fresh,
        multipliers: None,
        final_steps: None,
    })
}

#[derive(Clone)]
enum Duals {
    Scalar(Vec<f64>),
    Residual(Vec<DMatrix<f64>>),
}

impl Duals {
    fn norms(&self) -> Vec<f64> {
        match self {
            Duals::Scalar(xi) => xi.clone(),
            Duals::Residual(u) => u.iter().map(|m| m.norm()).collect(),
        }
    }

    fn finite(&self) -> bool {
        match self {
            Duals::Scalar(xi) => xi.iter().all(|v| v.is_finite()),
            Duals::Residual(u) => u.iter().all(|m| m.iter().all(|v| v.is_finite())),
        }
    }
}

fn lagrangian_gradient(
    f: &DMatrix<f64>,
    data: &GameData,
    ws: &[WitnessFit],
    ns: &NeighborhoodSystem,
    cfg: &GameConfig,
    duals: &Duals,
) -> DMatrix<f64> {
    let mut g = primal_loss_gradient(f, &data.targets, cfg.primal_loss);
    match duals {
        Duals::Scalar(xi) => add_neighborhood_pull(&mut g, f, ws, ns, cfg.deviation, |i| xi[i]),
        Duals::Residual(u) => {
            for (i, ui) in u.iter().enumerate() {
                for (p, &j) in ns.get(i).iter().enumerate() {
                    for c in 0..g.ncols() {
                        g[(j, c)] += ui[(p, c)];
                    }
                }
            }
        }
    }
    g
}

/// Projected (scalar) or proximal (residual) ascent step from `base`.
fn dual_step(
    base: &Duals,
    f: &DMatrix<f64>,
    ws: &[WitnessFit],
    devs: &[f64],
    ns: &NeighborhoodSystem,
    delta: f64,
    eta: f64,
) -> Duals {
    match base {
        Duals::Scalar(xi) => Duals::Scalar(
            xi.iter()
                .zip(devs)
                .map(|(&x, &d)| if delta.is_finite() { (x + eta * (d - delta)).max(0.0) } else { 0.0 })
                .collect(),
        ),
        Duals::Residual(u) => Duals::Residual(
            u.iter()
                .enumerate()
                .map(|(i, ui)| {
                    let b = ns.get(i);
                    let residual = select_rows(f, b) - &ws[i].fitted_values;
                    let v = ui + residual * eta;
                    let radius = eta * (delta * b.len() as f64).sqrt();
                    let norm = v.norm();
                    if !radius.is_finite() || norm <= radius {
                        DMatrix::zeros(v.nrows(), v.ncols())
                    } else {
                        v * (1.0 - radius / norm)
                    }
                })
                .collect(),
        ),
    }
}

/// `Σ_i ξ_i(dev_i − δ)` or `Σ_i ⟨u_i, r_i⟩ − sqrt(δ|B_i|)‖u_i‖`.
fn constraint_term(duals: &Duals, f: &DMatrix<f64>, ws: &[WitnessFit], devs: &[f64], ns: &NeighborhoodSystem, delta: f64) -> f64 {
    match duals {
        Duals::Scalar(xi) => xi.iter().zip(devs).filter(|(x, _)| **x > 0.0).map(|(x, d)| x * (d - delta)).sum(),
        Duals::Residual(u) => u
            .iter()
            .enumerate()
            .filter(|(_, ui)| ui.norm() > 0.0)
            .map(|(i, ui)| {
                let b = ns.get(i);
                let r = select_rows(f, b) - &ws[i].fitted_values;
                ui.dot(&r) - (delta * b.len() as f64).sqrt() * ui.norm()
            })
            .sum(),
    }
}

fn inf_norm(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |a, v| a.max(v.abs()))
}

/// Saddle point of the Lagrangian of `dev_i ≤ δ` (all `i`) by extragradient
/// steps, with witnesses refit at every evaluation. Step sizes drop tenfold
/// whenever an iterate blows up.
pub fn train_uniform(predictor: &mut dyn Predictor, data: &GameData, ns: &NeighborhoodSystem, cfg: &GameConfig) -> Result<GameReport> {
    let Criterion::Uniform { delta } = cfg.criterion else {
        return Err(Error::Config(format!("train_uniform called with a {} criterion", cfg.criterion.name())));
    };
    check_problem(predictor, data, ns, cfg)?;
    let mut eta_f = cfg.learning_rate;
    let mut eta_d = cfg.dual_learning_rate;
    let tol_c = cfg.constraint_tolerance;

    let mut theta = predictor.params();
    let mut f = predictor.predict(&data.inputs)?;
    let scale = 10.0 * inf_norm(&f).max(inf_norm(&data.targets)).max(1.0);
    let q = data.targets.ncols();
    let mut duals = match (cfg.multipliers, cfg.deviation) {
        (MultiplierForm::Residual, DeviationFn::Squared) => {
            Duals::Residual((0..data.len()).map(|i| DMatrix::zeros(ns.get(i).len(), q)).collect())
        }
        _ => Duals::Scalar(vec![0.0; data.len()]),
    };
    let mut ws = fit_witnesses(&data.features, &f, ns, cfg.witness)?;
    let mut devs = neighborhood_deviations(&ws, &f, ns, cfg.deviation)?;
    let mut traces = GameTraces::default();
    let mut converged = false;
    let mut last_change = f64::INFINITY;
    let mut iterations = 0;

    let step = |theta: &[f64], g: &DMatrix<f64>, eta: f64, predictor: &mut dyn Predictor| -> Result<Vec<f64>> {
        let pg = predictor.param_gradient(&data.inputs, g)?;
        Ok(theta.iter().zip(&pg).map(|(t, d)| t - eta * d).collect())
    };

    for it in 0..cfg.outer_iterations {
        iterations = it + 1;
        let g = lagrangian_gradient(&f, data, &ws, ns, cfg, &duals);
        let theta_half = step(&theta, &g, eta_f, predictor)?;
        let duals_half = dual_step(&duals, &f, &ws, &devs, ns, delta, eta_d);
        predictor.set_params(&theta_half)?;
        let f_half = predictor.predict(&data.inputs)?;
        let ws_half = fit_witnesses(&data.features, &f_half, ns, cfg.witness)?;
        let devs_half = neighborhood_deviations(&ws_half, &f_half, ns, cfg.deviation)?;

        let g_half = lagrangian_gradient(&f_half, data, &ws_half, ns, cfg, &duals_half);
        let theta_new = step(&theta, &g_half, eta_f, predictor)?;
        let duals_new = dual_step(&duals, &f_half, &ws_half, &devs_half, ns, delta, eta_d);
        predictor.set_params(&theta_new)?;
        let f_new = predictor.predict(&data.inputs)?;

        let blown = !f_new.iter().all(|v| v.is_finite()) || inf_norm(&f_new) > scale || !duals_new.finite();
        if blown {
            predictor.set_params(&theta)?;
            eta_f /= 10.0;
            eta_d /= 10.0;
            if eta_f < 1e-300 {
                return Err(Error::Divergence { iteration: iterations, objective: f64::INFINITY, initial: scale });
            }
            continue;
        }
        last_change = max_abs_diff(&f_new, &f);
        theta = theta_new;
        f = f_new;
        duals = duals_new;
        ws = fit_witnesses(&data.features, &f, ns, cfg.witness)?;
        devs = neighborhood_deviations(&ws, &f, ns, cfg.deviation)?;
        let violations = devs.iter().filter(|&&d| d > delta + tol_c).count();
        let norms = duals.norms();
        let lagr = primal_loss(&f, &data.targets, cfg.primal_loss) + constraint_term(&duals, &f, &ws, &devs, ns, delta);
        let norm = norms.iter().map(|v| v * v).sum::<f64>().sqrt();
        record(&mut traces, &f, data, &ws, ns, cfg, lagr, violations, norm)?;
        if last_change <= cfg.tolerance && violations == 0 {
            converged = true;
            break;
        }
    }
    Ok(GameReport {
        criterion: cfg.criterion,
        iterations,
        converged,
        last_change,
        traces,
        final_values: f,
        witnesses: ws,
        multipliers: Some(duals.norms()),
        final_steps: Some((eta_f, eta_d)),
    })
}
