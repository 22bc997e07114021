//! The experiment tasks behind [`super::execute`].

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::svg::{Curve, CurveStyle, PlotData};
use super::synth::{SynthData, SynthSpec};
use super::{fp_variant_name, ExperimentConfig, ExperimentReport, MetricsRow, NamedPlot, RunTrace, Task};
use crate::dataset::Dataset;
use crate::deviation::DeviationFn;
use crate::equilibrium::{iterate_fixed_point, residual_theorem1, solve_linear_fp, FixedPointProblem, FpFamily, FpVariant, SolveOptions};
use crate::error::{Error, Result};
use crate::game::{
    anchor_witness_values, fit_witnesses, neighborhood_deviations, primal_loss, train, Criterion, GameConfig, GameData,
    GameReport, PrimalLoss,
};
use crate::linalg::select_rows;
use crate::metrics::{deviation_rmse, transparency_scores, verify_bound_linear, verify_bound_tree, witness_param_tv};
use crate::neighborhood::NeighborhoodSystem;
use crate::predictor::{ar_rollout, window_row, Activation, Mlp, OutputActivation, SequencePredictor, TabularPredictor};
use crate::witness::{fit_ar_lagged, lag_row, ArParams, TreeDepth, TreeLoss, WitnessFamily, WitnessFit};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Synth1dOptions {
    /// Strength of the linear-witness run; the stump run is matched to its error.
    pub lambda: f64,
    /// Anchor whose neighborhood is drawn in the overlay plot.
    pub plot_anchor: usize,
    pub bisection_steps: usize,
}

impl Default for Synth1dOptions {
    fn default() -> Self {
        Self { lambda: 1.0, plot_anchor: 20, bisection_steps: 40 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MultilabelOptions {
    pub hidden: Vec<usize>,
    pub test_fraction: f64,
}

impl Default for MultilabelOptions {
    fn default() -> Self {
        Self { hidden: vec![16], test_fraction: 0.25 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SequenceOptions {
    pub train_sequences: usize,
    pub test_sequences: usize,
    pub window: usize,
    pub hidden: Vec<usize>,
    pub ar_order: usize,
    pub ar_alpha: f64,
    /// Observed prefix fed to the rollout.
    pub seed_steps: usize,
    pub horizon: usize,
    /// λ used when sweeping ε.
    pub epsilon_sweep_lambda: f64,
}

impl Default for SequenceOptions {
    fn default() -> Self {
        Self {
            train_sequences: 6,
            test_sequences: 4,
            window: 10,
            hidden: vec![16],
            ar_order: 2,
            ar_alpha: 0.0,
            seed_steps: 80,
            horizon: 20,
            epsilon_sweep_lambda: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FixedPointOptions {
    pub family: FpFamily,
    pub variants: Vec<FpVariant>,
    /// Appends a column of ones to the inputs.
    pub intercept: bool,
    /// δ grid for the uniform variant.
    pub deltas: Vec<f64>,
}

impl Default for FixedPointOptions {
    fn default() -> Self {
        Self {
            family: FpFamily::Linear,
            variants: vec![FpVariant::Symmetric, FpVariant::Asymmetric],
            intercept: false,
            deltas: vec![0.1],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundsOptions {
    pub max_d: usize,
    pub max_k: usize,
}

impl Default for BoundsOptions {
    fn default() -> Self {
        Self { max_d: 3, max_k: 2 }
    }
}

pub(super) fn default_spec(cfg: &ExperimentConfig) -> SynthSpec {
    let o = &cfg.sequence;
    match cfg.task {
        Task::Synth1d => SynthSpec::Curve1d { n: 60, noise: 0.15 },
        Task::SynthMultilabel => SynthSpec::Multilabel { n: 300, features: 8, labels: 3, flip: 0.05 },
        Task::Sequence => SynthSpec::Sinusoid { length: o.seed_steps + o.horizon, channels: 2, noise: 0.1 },
        Task::FixedPoint | Task::Bounds => SynthSpec::Curve1d { n: 20, noise: 0.1 },
    }
}

fn with_strength(c: Criterion, s: f64) -> Criterion {
    match c {
        Criterion::Uniform { .. } => Criterion::Uniform { delta: s },
        Criterion::Symmetric { .. } => Criterion::Symmetric { lambda: s },
        Criterion::Asymmetric { .. } => Criterion::Asymmetric { lambda: s },
        Criterion::AdjustedSymmetric { .. } => Criterion::AdjustedSymmetric { lambda: s },
    }
}

fn game_for(cfg: &ExperimentConfig, default: GameConfig) -> GameConfig {
    let mut g = cfg.game.clone().unwrap_or(default);
    g.seed = cfg.seed;
    g
}

fn expect_dataset(data: SynthData, task: Task) -> Result<Dataset> {
    match data {
        SynthData::Dataset(d) => Ok(d),
        SynthData::Series { .. } => Err(Error::Config(format!("task {} needs a dataset, not a series", task.name()))),
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn report(cfg: &ExperimentConfig, rows: Vec<MetricsRow>, details: serde_json::Value, plots: Vec<NamedPlot>, traces: Vec<RunTrace>) -> ExperimentReport {
    ExperimentReport { task: cfg.task, seed: cfg.seed, converged: true, rows, details, plots, traces }
}

/// Parameter TV across anchors in index order, when all parameter vectors
/// have the same length.
fn param_tv(ws: &[WitnessFit]) -> Option<f64> {
    let params: Vec<Vec<f64>> = ws.iter().map(|w| w.params.flatten()).collect();
    witness_param_tv(&params).ok()
}

fn column(m: &DMatrix<f64>, c: usize) -> Vec<f64> {
    m.column(c).iter().copied().collect()
}

// ---------------------------------------------------------------- synth_1d

fn train_tabular(data: &GameData, ns: &NeighborhoodSystem, game: &GameConfig) -> Result<GameReport> {
    let mut p = TabularPredictor::new(data.targets.clone())?;
    train(&mut p, data, ns, game)
}

fn mean_deviation(data: &GameData, f: &DMatrix<f64>, ns: &NeighborhoodSystem, family: WitnessFamily) -> Result<f64> {
    let ws = fit_witnesses(&data.features, f, ns, family)?;
    Ok(mean(&neighborhood_deviations(&ws, f, ns, DeviationFn::Squared)?))
}

pub(crate) const LINEAR_1D: WitnessFamily = WitnessFamily::Linear { intercept: true };
pub(crate) const STUMP: WitnessFamily = WitnessFamily::Tree { depth: TreeDepth::Fixed(1), loss: TreeLoss::Mse };

pub(super) fn synth_1d(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let opts = &cfg.synth_1d;
    let ds = expect_dataset(cfg.load_data(default_spec(cfg))?, cfg.task)?;
    if ds.n_targets() != 1 {
        return Err(Error::Config("synth_1d expects a single target column".into()));
    }
    let data = GameData::from(&ds);
    let eps = cfg.epsilon.unwrap_or(7);
    let ns = NeighborhoodSystem::window(data.len(), eps)?;
    let base = game_for(
        cfg,
        GameConfig { criterion: Criterion::Symmetric { lambda: 1.0 }, outer_iterations: 5000, ..GameConfig::default() },
    );
    let mse = |r: &GameReport| primal_loss(&r.final_values, &data.targets, PrimalLoss::Squared) / data.len() as f64;

    let run = |family: WitnessFamily, lambda: f64| -> Result<GameReport> {
        let g = GameConfig { criterion: with_strength(base.criterion, lambda), witness: family, ..base.clone() };
        train_tabular(&data, &ns, &g)
    };

    let lin = run(LINEAR_1D, opts.lambda)?;
    let target = mse(&lin);

    // Stump strength with the same primal error, by bisection on log10 λ.
    let (mut lo, mut hi) = (-6.0_f64, 0.0_f64);
    while mse(&run(STUMP, 10f64.powf(hi))?) < target {
        hi += 1.0;
        if hi > 8.0 {
            return Err(Error::Undefined("no stump strength reaches the linear run's error".into()));
        }
    }
    let mut best: Option<(f64, GameReport)> = None;
    for _ in 0..opts.bisection_steps {
        let mid = 0.5 * (lo + hi);
        let r = run(STUMP, 10f64.powf(mid))?;
        let e = mse(&r);
        if best.as_ref().is_none_or(|(_, b)| (mse(b) - target).abs() > (e - target).abs()) {
            best = Some((10f64.powf(mid), r));
        }
        if e < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (stump_lambda, stump) = best.expect("at least one bisection step");

    let mut cross = serde_json::Map::new();
    let mut rows = Vec::new();
    let mut traces = Vec::new();
    for (name, lambda, r) in [("linear", opts.lambda, &lin), ("stump", stump_lambda, &stump)] {
        let lin_dev = mean_deviation(&data, &r.final_values, &ns, LINEAR_1D)?;
        let stump_dev = mean_deviation(&data, &r.final_values, &ns, STUMP)?;
        cross.insert(
            name.into(),
            json!({ "lambda": lambda, "mse": mse(r), "linear_deviation": lin_dev, "stump_deviation": stump_dev }),
        );
        rows.push(MetricsRow {
            lambda_or_delta: Some(lambda),
            epsilon: Some(eps),
            error: Some(mse(r)),
            deviation: Some(if name == "linear" { lin_dev } else { stump_dev }),
            tv: param_tv(&r.witnesses),
            iterations: Some(r.iterations),
            converged: r.converged,
            ..MetricsRow::new(format!("synth_1d_{name}"))
        });
        traces.push(RunTrace { run: name.into(), traces: r.traces.clone() });
    }

    let x = column(&data.inputs, 0);
    let a = opts.plot_anchor.min(data.len() - 1);
    let b = ns.get(a);
    let bx: Vec<f64> = b.iter().map(|&j| x[j]).collect();
    let overlay = PlotData::CurveOverlay(vec![
        Curve { name: "data".into(), x: x.clone(), y: column(&data.targets, 0), style: CurveStyle::Points },
        Curve { name: "linear-trained".into(), x: x.clone(), y: column(&lin.final_values, 0), style: CurveStyle::Line },
        Curve { name: "stump-trained".into(), x: x.clone(), y: column(&stump.final_values, 0), style: CurveStyle::Line },
        Curve { name: "linear witness".into(), x: bx.clone(), y: column(&lin.witnesses[a].fitted_values, 0), style: CurveStyle::Line },
        Curve { name: "stump witness".into(), x: bx, y: column(&stump.witnesses[a].fitted_values, 0), style: CurveStyle::Line },
    ]);
    let details = json!({ "epsilon": eps, "plot_anchor": a, "runs": cross });
    Ok(report(cfg, rows, details, vec![NamedPlot { name: "overlay".into(), plot: overlay }], traces))
}

// ------------------------------------------------------- synth_multilabel

pub(super) fn synth_multilabel(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let opts = &cfg.multilabel;
    let ds = expect_dataset(
        cfg.load_data(default_spec(cfg))?, cfg.task)?;
    if !(opts.test_fraction > 0.0 && opts.test_fraction < 1.0) {
        return Err(Error::Config("test_fraction must be in (0, 1)".into()));
    }
    let n = ds.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(cfg.seed));
    let n_test = ((n as f64 * opts.test_fraction).round() as usize).clamp(1, n - 1);
    let (mut test_idx, mut train_idx) = (order[..n_test].to_vec(), order[n_test..].to_vec());
    test_idx.sort_unstable();
    train_idx.sort_unstable();
    let split = |idx: &[usize]| {
        GameData::new(select_rows(ds.inputs(), idx), select_rows(ds.inputs(), idx), select_rows(ds.targets(), idx))
    };
    let (train_data, test_data) = (split(&train_idx)?, split(&test_idx)?);
    let radius = cfg.radius.unwrap_or(1.5);
    let ns_train = NeighborhoodSystem::ball(&train_data.inputs, radius)?;
    let ns_test = NeighborhoodSystem::ball(&test_data.inputs, radius)?;
    let base = game_for(
        cfg,
        GameConfig {
            criterion: Criterion::Asymmetric { lambda: 1.0 },
            witness: WitnessFamily::Tree { depth: TreeDepth::Rule(cfg.depth_offset), loss: TreeLoss::Tv },
            deviation: DeviationFn::TotalVariation,
            primal_loss: PrimalLoss::CrossEntropy,
            outer_iterations: 300,
            ..GameConfig::default()
        },
    );
    let mut sizes = vec![ds.n_features()];
    sizes.extend(&opts.hidden);
    sizes.push(ds.n_targets());
    let init = Mlp::new(&sizes, Activation::Tanh, OutputActivation::Sigmoid, &mut ChaCha8Rng::seed_from_u64(cfg.seed))?;

    let results: Vec<Result<(MetricsRow, RunTrace, serde_json::Value)>> = cfg
        .lambdas()
        .into_par_iter()
        .map(|lambda| {
            let g = GameConfig { criterion: with_strength(base.criterion, lambda), ..base.clone() };
            let mut model = init.clone();
            let rep = train(&mut model, &train_data, &ns_train, &g)?;
            let f = model.forward(&test_data.inputs)?;
            let ws = fit_witnesses(&test_data.features, &f, &ns_test, g.witness)?;
            let anchor = anchor_witness_values(&ws, &ns_test, &test_data.features);
            let scores = transparency_scores(&test_data.targets, &f, &anchor, &ws, &ns_test)?;
            let dev = mean(&neighborhood_deviations(&ws, &f, &ns_test, g.deviation)?);
            let row = MetricsRow {
                lambda_or_delta: Some(lambda),
                error: Some(primal_loss(&f, &test_data.targets, g.primal_loss) / test_data.len() as f64),
                deviation: Some(dev),
                auc_f_y: Some(scores.auc_f_y),
                auc_g_y: Some(scores.auc_g_y),
                auc_b: Some(scores.auc_b),
                auc_d: Some(scores.auc_d),
                iterations: Some(rep.iterations),
                converged: rep.converged,
                ..MetricsRow::new("synth_multilabel")
            };
            Ok((row, RunTrace { run: format!("lambda={lambda}"), traces: rep.traces }, json!({ "lambda": lambda, "scores": scores })))
        })
        .collect();
    let mut rows = Vec::new();
    let mut traces = Vec::new();
    let mut details = Vec::new();
    for r in results {
        let (row, t, d) = r?;
        rows.push(row);
        traces.push(t);
        details.push(d);
    }
    let details = json!({ "radius": radius, "train": train_data.len(), "test": test_data.len(), "runs": details });
    Ok(report(cfg, rows, details, vec![], traces))
}

// ---------------------------------------------------------------- sequence

/// Training anchors from several sequences: predictor windows, AR lag rows
/// and next values, with the per-sequence anchor counts.
pub fn sequence_game_data(series: &[DMatrix<f64>], window: usize, order: usize) -> Result<(GameData, Vec<usize>)> {
    if order == 0 || window < order {
        return Err(Error::Config(format!("window {window} must be >= AR order {order} >= 1")));
    }
    let c = series.first().map_or(0, |s| s.ncols());
    let (mut inputs, mut feats, mut targets, mut lengths) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for s in series {
        if s.ncols() != c || s.nrows() < window + 1 {
            return Err(Error::Config("sequences must share channels and exceed the window".into()));
        }
        let mut count = 0;
        for t in window - 1..s.nrows() - 1 {
            inputs.extend(window_row(s, t, window)?);
            feats.extend(lag_row(&s.rows(0, t + 1).into_owned(), order)?);
            targets.extend(s.row(t + 1).iter());
            count += 1;
        }
        lengths.push(count);
    }
    let n: usize = lengths.iter().sum();
    let data = GameData::new(
        DMatrix::from_row_slice(n, window * c, &inputs),
        DMatrix::from_row_slice(n, order * c, &feats),
        DMatrix::from_row_slice(n, c, &targets),
    )?;
    Ok((data, lengths))
}

/// Parameter TV within each sequence, averaged over sequences.
fn segmented_tv(ws: &[WitnessFit], lengths: &[usize]) -> Result<f64> {
    let mut offset = 0;
    let mut tvs = Vec::new();
    for &len in lengths {
        let params: Vec<Vec<f64>> = ws[offset..offset + len].iter().map(|w| w.params.flatten()).collect();
        tvs.push(witness_param_tv(&params)?);
        offset += len;
    }
    Ok(mean(&tvs))
}

fn rollout_rmse(model: &impl crate::predictor::RolloutModel, tests: &[DMatrix<f64>], seed_steps: usize, horizon: usize) -> Result<f64> {
    let mut sq = 0.0;
    let mut count = 0usize;
    for s in tests {
        let gen = ar_rollout(model, &s.rows(0, seed_steps).into_owned(), horizon)?;
        sq += (gen - s.rows(seed_steps, horizon)).norm_squared();
        count += horizon * s.ncols();
    }
    Ok((sq / count as f64).sqrt())
}

struct SequencePoint {
    row: MetricsRow,
    trace: RunTrace,
    step_tv: Vec<f64>,
    heatmap: DMatrix<f64>,
}

fn ar_params_of(w: &WitnessFit) -> Vec<f64> {
    w.params.flatten()
}

pub(super) fn sequence(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let o = &cfg.sequence;
    let default = default_spec(cfg);
    let (train_series, test_series) = match &cfg.data {
        Some(super::DataSource::SeriesCsv(_)) => {
            let SynthData::Series { series, .. } = cfg.load_data(default)? else { unreachable!() };
            (vec![series.values.clone()], vec![series.values])
        }
        _ => {
            let spec = match &cfg.data {
                None => default,
                Some(super::DataSource::Synth(s)) => s.clone(),
                Some(_) => return Err(Error::Config("sequence task needs a series source".into())),
            };
            let draw = |k: u64| -> Result<DMatrix<f64>> {
                match super::gen_synth(&spec, cfg.seed.wrapping_mul(1_000_003).wrapping_add(k))? {
                    SynthData::Series { series, .. } => Ok(series.values),
                    SynthData::Dataset(_) => Err(Error::Config("sequence task needs a series generator".into())),
                }
            };
            let train: Vec<_> = (0..o.train_sequences as u64).map(draw).collect::<Result<_>>()?;
            let test: Vec<_> = (0..o.test_sequences as u64).map(|k| draw(10_000 + k)).collect::<Result<_>>()?;
            (train, test)
        }
    };
    if train_series.is_empty() || test_series.is_empty() {
        return Err(Error::Config("need at least one training and one test sequence".into()));
    }
    if test_series.iter().any(|s| s.nrows() < o.seed_steps + o.horizon || o.seed_steps < o.window) {
        return Err(Error::Config("test sequences must cover seed_steps + horizon, and seed_steps >= window".into()));
    }
    let c = train_series[0].ncols();
    let (data, lengths) = sequence_game_data(&train_series, o.window, o.ar_order)?;
    let witness = WitnessFamily::Ar { order: o.ar_order, alpha: o.ar_alpha };
    let base = game_for(
        cfg,
        GameConfig {
            criterion: Criterion::Asymmetric { lambda: 1.0 },
            witness,
            outer_iterations: 400,
            learning_rate: 1e-2,
            ..GameConfig::default()
        },
    );
    let init = SequencePredictor::new(o.window, c, &o.hidden, false, &mut ChaCha8Rng::seed_from_u64(cfg.seed))?;

    let point = |lambda: f64, eps: usize, task: &str| -> Result<SequencePoint> {
        let ns = NeighborhoodSystem::segmented_windows(&lengths, eps)?;
        let g = GameConfig { criterion: with_strength(base.criterion, lambda), ..base.clone() };
        let mut model = init.clone();
        let rep = train(&mut model, &data, &ns, &g)?;
        let anchor = anchor_witness_values(&rep.witnesses, &ns, &data.features);
        let first = &rep.witnesses[..lengths[0]];
        let params: Vec<Vec<f64>> = first.iter().map(ar_params_of).collect();
        let step_tv = params.windows(2).map(|w| w[0].iter().zip(&w[1]).map(|(a, b)| (a - b).abs()).sum()).collect();
        let heatmap = DMatrix::from_fn(params[0].len(), params.len(), |r, t| params[t][r]);
        Ok(SequencePoint {
            row: MetricsRow {
                lambda_or_delta: Some(lambda),
                epsilon: Some(eps),
                error: Some(rollout_rmse(&model, &test_series, o.seed_steps, o.horizon)?),
                deviation: Some(deviation_rmse(&rep.final_values, &anchor)?),
                tv: Some(segmented_tv(&rep.witnesses, &lengths)?),
                iterations: Some(rep.iterations),
                converged: rep.converged,
                ..MetricsRow::new(task)
            },
            trace: RunTrace { run: format!("{task} lambda={lambda} epsilon={eps}"), traces: rep.traces },
            step_tv,
            heatmap,
        })
    };

    let eps = cfg.epsilon.unwrap_or(9);
    let mut jobs: Vec<(f64, usize, &str)> = cfg.lambdas().into_iter().map(|l| (l, eps, "sequence")).collect();
    if let Some(es) = &cfg.epsilons {
        jobs.extend(es.iter().map(|&e| (o.epsilon_sweep_lambda, e, "sequence_epsilon")));
    }
    let points: Vec<SequencePoint> = jobs.par_iter().map(|&(l, e, t)| point(l, e, t)).collect::<Result<_>>()?;

    // A predictor that is itself one AR model: every local fit recovers it.
    let ns = NeighborhoodSystem::segmented_windows(&lengths, eps)?;
    let global = fit_ar_lagged(&data.features, &data.targets, o.ar_order, o.ar_alpha)?;
    let f_ar = global.predict(&data.features);
    let ws_ar = fit_witnesses(&data.features, &f_ar, &ns, witness)?;
    let baseline = MetricsRow {
        epsilon: Some(eps),
        error: Some(rollout_rmse(&global, &test_series, o.seed_steps, o.horizon)?),
        deviation: Some(deviation_rmse(&f_ar, &anchor_witness_values(&ws_ar, &ns, &data.features))?),
        tv: Some(segmented_tv(&ws_ar, &lengths)?),
        ..MetricsRow::new("sequence_ar_baseline")
    };

    let mut plots = Vec::new();
    let lambda_points: Vec<&SequencePoint> = points.iter().filter(|p| p.row.task == "sequence").collect();
    if let (Some(lo), Some(hi)) = (lambda_points.first(), lambda_points.last()) {
        plots.push(NamedPlot { name: "witness_params_low".into(), plot: PlotData::ParamHeatmap(lo.heatmap.clone()) });
        plots.push(NamedPlot { name: "witness_params_high".into(), plot: PlotData::ParamHeatmap(hi.heatmap.clone()) });
        plots.push(NamedPlot {
            name: "tv_cdf".into(),
            plot: PlotData::Cdf(
                lambda_points
                    .iter()
                    .map(|p| (format!("lambda={}", p.row.lambda_or_delta.unwrap_or(f64::NAN)), p.step_tv.clone()))
                    .collect(),
            ),
        });
    }
    let details = json!({
        "channels": c,
        "train_anchors": data.len(),
        "epsilon": eps,
        "ar_baseline": ArBaseline::from(&global),
    });
    let mut rows: Vec<MetricsRow> = Vec::new();
    let mut traces = Vec::new();
    for p in points {
        rows.push(p.row);
        traces.push(p.trace);
    }
    rows.push(baseline);
    Ok(report(cfg, rows, details, plots, traces))
}

#[derive(Serialize)]
struct ArBaseline {
    params: Vec<f64>,
}

impl From<&ArParams> for ArBaseline {
    fn from(p: &ArParams) -> Self {
        Self { params: p.flatten() }
    }
}

// ------------------------------------------------------------- fixed_point

fn fp_family_witness(f: FpFamily) -> WitnessFamily {
    match f {
        FpFamily::Linear => WitnessFamily::Linear { intercept: false },
        FpFamily::Ridge { alpha } => WitnessFamily::Ridge { alpha, intercept: false },
        FpFamily::Constant => WitnessFamily::Constant,
    }
}

pub(super) fn fixed_point(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let o = &cfg.fixed_point;
    let ds = match &cfg.data {
        None => Dataset::continuous(DMatrix::from_column_slice(2, 1, &[1.0, 2.0]), DMatrix::from_column_slice(2, 1, &[0.0, 3.0]))?,
        Some(_) => expect_dataset(cfg.load_data(default_spec(cfg))?, cfg.task)?,
    };
    if ds.n_targets() != 1 {
        return Err(Error::Config("fixed_point expects a single target column".into()));
    }
    let n = ds.len();
    let inputs = if o.intercept { ds.inputs().clone().insert_column(ds.n_features(), 1.0) } else { ds.inputs().clone() };
    let y = DVector::from_column_slice(ds.targets().as_slice());
    let ns = match (cfg.epsilon, cfg.radius) {
        (Some(e), _) => NeighborhoodSystem::circular(n, e)?,
        (None, Some(r)) => NeighborhoodSystem::ball(&inputs, r)?,
        (None, None) => NeighborhoodSystem::full(n)?,
    };
    let witness = fp_family_witness(o.family);
    let lambdas = cfg.lambdas.clone().unwrap_or_else(|| vec![1.0]);
    let mut rows = Vec::new();
    let mut sols = Vec::new();
    let mut plots = Vec::new();
    for &variant in &o.variants {
        let strengths = if variant == FpVariant::Uniform { o.deltas.clone() } else { lambdas.clone() };
        for s in strengths {
            let problem = FixedPointProblem::new(inputs.clone(), y.clone(), ns.clone(), s, o.family)
                .map_err(|e| Error::Config(e.to_string()))?;
            let opts = if variant == FpVariant::Uniform { SolveOptions::uniform() } else { SolveOptions::games() };
            let sol = match variant {
                FpVariant::Uniform => iterate_fixed_point(&problem, variant, opts, None)?,
                _ => solve_linear_fp(&problem, variant)?,
            };
            let f = DVector::from_vec(sol.f.clone());
            let fm = DMatrix::from_column_slice(n, 1, f.as_slice());
            let ws = fit_witnesses(&inputs, &fm, &ns, witness)?;
            let dev = mean(&neighborhood_deviations(&ws, &fm, &ns, DeviationFn::Squared)?);
            let residual = residual_theorem1(&f, &problem, variant)?;
            rows.push(MetricsRow {
                lambda_or_delta: Some(s),
                epsilon: cfg.epsilon,
                error: Some(((&f - &y).norm_squared() / n as f64).sqrt()),
                deviation: Some(dev),
                tv: witness_param_tv(&sol.witness_params).ok(),
                iterations: Some(sol.iterations),
                converged: sol.converged,
                ..MetricsRow::new(format!("fixed_point_{}", fp_variant_name(variant)))
            });
            if plots.is_empty() && !sol.witness_params.is_empty() && !sol.witness_params[0].is_empty() {
                let p = &sol.witness_params;
                plots.push(NamedPlot {
                    name: "witness_params".into(),
                    plot: PlotData::ParamHeatmap(DMatrix::from_fn(p[0].len(), p.len(), |r, t| p[t][r])),
                });
            }
            sols.push(json!({ "variant": variant, "strength": s, "residual_theorem1": residual, "solution": sol }));
        }
    }
    Ok(report(cfg, rows, json!({ "family": o.family, "solutions": sols }), plots, vec![]))
}

// ------------------------------------------------------------------ bounds

pub(super) fn bounds(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let o = &cfg.bounds;
    let mut rows = Vec::new();
    let mut lin = Vec::new();
    let mut tree = Vec::new();
    for d in 1..=o.max_d {
        let r = verify_bound_linear(d).map_err(|e| Error::Config(e.to_string()))?;
        rows.push(MetricsRow {
            epsilon: Some(d + 1),
            deviation: Some(r.at_bound_deviation),
            converged: r.passed,
            ..MetricsRow::new(format!("bounds_linear_d{d}"))
        });
        lin.push(r);
    }
    for k in 1..=o.max_k {
        let r = verify_bound_tree(k).map_err(|e| Error::Config(e.to_string()))?;
        rows.push(MetricsRow {
            epsilon: Some((1 << k) + 1),
            deviation: Some(r.at_bound_deviation),
            converged: r.passed,
            ..MetricsRow::new(format!("bounds_tree_k{k}"))
        });
        tree.push(r);
    }
    Ok(report(cfg, rows, json!({ "linear": lin, "tree": tree }), vec![], vec![]))
}
