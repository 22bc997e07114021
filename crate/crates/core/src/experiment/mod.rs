//! Config-driven experiments: synthetic data, sweeps, persisted results and plots.

mod series_io;
pub mod svg;
pub mod synth;
mod tasks;

use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

pub use series_io::{ingest_series_csv, write_series_csv};
pub use svg::{emit_svg, Curve, CurveStyle, PlotData};
pub use synth::{curve_1d, gen_synth, Series, SynthData, SynthSpec};
pub use tasks::{
    BoundsOptions, FixedPointOptions, MultilabelOptions, SequenceOptions, Synth1dOptions,
};

use crate::dataset::Dataset;
use crate::equilibrium::FpVariant;
use crate::error::{Error, Result};
use crate::game::{GameConfig, GameTraces};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    #[serde(rename = "synth_1d")]
    Synth1d,
    SynthMultilabel,
    Sequence,
    FixedPoint,
    Bounds,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Synth1d => "synth_1d",
            Task::SynthMultilabel => "synth_multilabel",
            Task::Sequence => "sequence",
            Task::FixedPoint => "fixed_point",
            Task::Bounds => "bounds",
        }
    }
}

/// Where a task's data comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataSource {
    Synth(SynthSpec),
    /// A dataset CSV as written by [`Dataset::write_csv`].
    Csv(PathBuf),
    /// A series CSV with header `t,ch0,…`.
    SeriesCsv(PathBuf),
    Inline { inputs: Vec<Vec<f64>>, targets: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub task: Task,
    pub seed: u64,
    #[serde(default)]
    pub data: Option<DataSource>,
    /// Game settings; the sweep overrides the criterion strength.
    #[serde(default)]
    pub game: Option<GameConfig>,
    /// Window radius for sequence and 1-D tasks.
    #[serde(default)]
    pub epsilon: Option<usize>,
    /// Ball radius for feature-space neighborhoods.
    #[serde(default)]
    pub radius: Option<f64>,
    /// Offset Δ in the tree depth rule.
    #[serde(default)]
    pub depth_offset: i64,
    #[serde(default)]
    pub lambdas: Option<Vec<f64>>,
    #[serde(default)]
    pub epsilons: Option<Vec<usize>>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub synth_1d: Synth1dOptions,
    #[serde(default)]
    pub multilabel: MultilabelOptions,
    #[serde(default)]
    pub sequence: SequenceOptions,
    #[serde(default)]
    pub fixed_point: FixedPointOptions,
    #[serde(default)]
    pub bounds: BoundsOptions,
}

pub const DEFAULT_LAMBDAS: [f64; 5] = [0.0, 0.1, 1.0, 10.0, 100.0];
pub const DEFAULT_EPSILONS: [usize; 7] = [1, 5, 7, 9, 13, 17, 19];

impl ExperimentConfig {
    pub fn new(task: Task, seed: u64) -> Self {
        Self {
            task,
            seed,
            data: None,
            game: None,
            epsilon: None,
            radius: None,
            depth_offset: 0,
            lambdas: None,
            epsilons: None,
            output: None,
            synth_1d: Synth1dOptions::default(),
            multilabel: MultilabelOptions::default(),
            sequence: SequenceOptions::default(),
            fixed_point: FixedPointOptions::default(),
            bounds: BoundsOptions::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        match &self.data {
            Some(DataSource::Csv(p)) | Some(DataSource::SeriesCsv(p)) if !p.exists() => {
                return Err(Error::Config(format!("data file {} does not exist", p.display())));
            }
            _ => {}
        }
        if let Some(g) = &self.game {
            g.validate().map_err(|e| Error::Config(e.to_string()))?;
        }
        if let Some(ls) = &self.lambdas {
            if ls.is_empty() || ls.iter().any(|l| !(*l >= 0.0)) {
                return Err(Error::Config("lambdas must be a non-empty list of values >= 0".into()));
            }
        }
        if let Some(es) = &self.epsilons {
            if es.is_empty() {
                return Err(Error::Config("epsilons must not be empty".into()));
            }
        }
        if let Some(r) = self.radius {
            if !(r > 0.0) || !r.is_finite() {
                return Err(Error::Config(format!("radius must be positive, got {r}")));
            }
        }
        Ok(())
    }

    pub fn lambdas(&self) -> Vec<f64> {
        self.lambdas.clone().unwrap_or_else(|| DEFAULT_LAMBDAS.to_vec())
    }

    pub fn epsilons(&self) -> Vec<usize> {
        self.epsilons.clone().unwrap_or_else(|| DEFAULT_EPSILONS.to_vec())
    }

    pub(crate) fn load_data(&self, default: SynthSpec) -> Result<SynthData> {
        match &self.data {
            None => gen_synth(&default, self.seed),
            Some(DataSource::Synth(spec)) => gen_synth(spec, self.seed),
            Some(DataSource::Csv(p)) => Ok(SynthData::Dataset(Dataset::read_csv(p)?)),
            Some(DataSource::SeriesCsv(p)) => Ok(SynthData::Series { series: ingest_series_csv(p)?, ar: None }),
            Some(DataSource::Inline { inputs, targets }) => {
                let rows = |v: &Vec<Vec<f64>>, what: &str| -> Result<DMatrix<f64>> {
                    let width = v.first().map_or(0, Vec::len);
                    if v.is_empty() || width == 0 || v.iter().any(|r| r.len() != width) {
                        return Err(Error::Config(format!("inline {what} must be a non-empty rectangular array")));
                    }
                    Ok(DMatrix::from_row_iterator(v.len(), width, v.iter().flatten().copied()))
                };
                Ok(SynthData::Dataset(Dataset::continuous(rows(inputs, "inputs")?, rows(targets, "targets")?)?))
            }
        }
    }
}

/// One line of `metrics.csv`. Columns that do not apply to a task are empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub task: String,
    pub lambda_or_delta: Option<f64>,
    pub epsilon: Option<usize>,
    pub error: Option<f64>,
    pub deviation: Option<f64>,
    pub tv: Option<f64>,
    pub auc_f_y: Option<f64>,
    pub auc_g_y: Option<f64>,
    #[serde(rename = "auc_B")]
    pub auc_b: Option<f64>,
    #[serde(rename = "auc_D")]
    pub auc_d: Option<f64>,
    pub iterations: Option<usize>,
    pub converged: bool,
}

impl MetricsRow {
    pub fn new(task: impl Into<String>) -> Self {
        Self {
            task: task.into(),
            lambda_or_delta: None,
            epsilon: None,
            error: None,
            deviation: None,
            tv: None,
            auc_f_y: None,
            auc_g_y: None,
            auc_b: None,
            auc_d: None,
            iterations: None,
            converged: true,
        }
    }
}

pub fn write_metrics_csv(rows: &[MetricsRow], path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_metrics_csv(path: impl AsRef<Path>) -> Result<Vec<MetricsRow>> {
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<std::result::Result<Vec<MetricsRow>, _>>()?)
}

/// A labelled trace from one sweep point.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct RunTrace {
    pub run: String,
    pub traces: GameTraces,
}

fn write_traces_csv(runs: &[RunTrace], path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["run", "iteration", "primal_loss", "objective", "mean_dev", "max_dev", "violations"])?;
    for r in runs {
        let t = &r.traces;
        for k in 0..t.len() {
            w.write_record([
                r.run.clone(),
                (k + 1).to_string(),
                t.primal_loss[k].to_string(),
                t.objective[k].to_string(),
                t.mean_dev[k].to_string(),
                t.max_dev[k].to_string(),
                t.violations[k].to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NamedPlot {
    pub name: String,
    pub plot: PlotData,
}

/// Everything a task produces before it is written to disk.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub task: Task,
    pub seed: u64,
    pub converged: bool,
    pub rows: Vec<MetricsRow>,
    /// Task-specific details.
    pub details: serde_json::Value,
    pub plots: Vec<NamedPlot>,
    #[serde(skip)]
    pub traces: Vec<RunTrace>,
}

/// Runs the configured task without touching the file system.
pub fn execute(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let mut report = match cfg.task {
        Task::Synth1d => tasks::synth_1d(cfg)?,
        Task::SynthMultilabel => tasks::synth_multilabel(cfg)?,
        Task::Sequence => tasks::sequence(cfg)?,
        Task::FixedPoint => tasks::fixed_point(cfg)?,
        Task::Bounds => tasks::bounds(cfg)?,
    };
    report.converged = report.rows.iter().all(|r| r.converged);
    Ok(report)
}

/// Writes `report.json`, `metrics.csv`, `traces.csv` and one SVG per plot.
pub fn write_artifacts(report: &ExperimentReport, out: impl AsRef<Path>) -> Result<()> {
    let out = out.as_ref();
    fs::create_dir_all(out)?;
    fs::write(out.join("report.json"), serde_json::to_string_pretty(report)?)?;
    write_metrics_csv(&report.rows, out.join("metrics.csv"))?;
    write_traces_csv(&report.traces, out.join("traces.csv"))?;
    write_plots(&report.plots, out)
}

pub fn write_plots(plots: &[NamedPlot], out: &Path) -> Result<()> {
    for p in plots {
        fs::write(out.join(format!("{}.svg", p.name)), emit_svg(&p.plot)?)?;
    }
    Ok(())
}

/// Process exit status for a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    ConfigError = 1,
    NotConverged = 2,
}

/// Executes `cfg` and writes its artifacts to `out` (or `cfg.output`).
pub fn run_experiment(cfg: &ExperimentConfig, out: Option<&Path>) -> Result<ExitStatus> {
    let out = out.map(Path::to_path_buf).or_else(|| cfg.output.clone()).unwrap_or_else(|| PathBuf::from("out"));
    let report = match execute(cfg) {
        Ok(r) => r,
        Err(Error::NonConvergence { iterations, residual }) => {
            fs::create_dir_all(&out)?;
            let msg = serde_json::json!({ "task": cfg.task, "error": "non-convergence", "iterations": iterations, "residual": residual });
            fs::write(out.join("report.json"), serde_json::to_string_pretty(&msg)?)?;
            return Ok(ExitStatus::NotConverged);
        }
        Err(e) => return Err(e),
    };
    write_artifacts(&report, &out)?;
    Ok(if report.converged { ExitStatus::Success } else { ExitStatus::NotConverged })
}

pub(crate) fn fp_variant_name(v: FpVariant) -> &'static str {
    match v {
        FpVariant::Symmetric => "symmetric",
        FpVariant::Asymmetric => "asymmetric",
        FpVariant::Uniform => "uniform",
    }
}

/// Generates the configured data (or the task's default) and writes it to
/// `out`: `dataset.csv`, or `series.csv` plus `ar.json` for AR generators.
pub fn write_synth(cfg: &ExperimentConfig, out: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let out = out.as_ref();
    fs::create_dir_all(out)?;
    let spec = match &cfg.data {
        Some(DataSource::Synth(s)) => s.clone(),
        Some(_) => return Err(Error::Config("synth needs a generator data source".into())),
        None => tasks::default_spec(cfg),
    };
    let mut written = Vec::new();
    match gen_synth(&spec, cfg.seed)? {
        SynthData::Dataset(d) => {
            let p = out.join("dataset.csv");
            d.write_csv(&p)?;
            written.push(p);
        }
        SynthData::Series { series, ar } => {
            let p = out.join("series.csv");
            write_series_csv(&series, &p)?;
            written.push(p);
            if let Some(ar) = ar {
                let p = out.join("ar.json");
                fs::write(&p, serde_json::to_string_pretty(&ar)?)?;
                written.push(p);
            }
        }
    }
    Ok(written)
}
