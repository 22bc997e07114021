use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use transparency_game::experiment::{
    read_metrics_csv, run_experiment, write_plots, write_synth, ExitStatus, ExperimentConfig, NamedPlot, Task,
};
use transparency_game::{Error, Result};

#[derive(Parser)]
#[command(version, about = "Co-operative transparency games: training, equilibria and metrics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON experiment config.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate synthetic data.
    Synth(Common),
    /// Run a training task (synth_1d, synth_multilabel or sequence).
    Train(Common),
    /// Solve the equilibrium fixed points.
    FixedPoint(Common),
    /// Check effective neighborhood size bounds.
    Bounds(Common),
    /// Print metrics.csv from an output directory.
    Metrics(Common),
    /// Re-emit SVG plots from an output directory's report.json.
    Plot(Common),
}

fn load(c: &Common, fallback: Option<Task>) -> Result<ExperimentConfig> {
    let mut cfg = match (&c.config, fallback) {
        (Some(p), _) => ExperimentConfig::load(p)?,
        (None, Some(task)) => ExperimentConfig::new(task, c.seed.unwrap_or(0)),
        (None, None) => return Err(Error::Config("--config is required".into())),
    };
    if let Some(seed) = c.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn out_dir(c: &Common, cfg: Option<&ExperimentConfig>) -> PathBuf {
    c.out.clone().or_else(|| cfg.and_then(|g| g.output.clone())).unwrap_or_else(|| PathBuf::from("out"))
}

fn run_task(c: &Common, fallback: Option<Task>, allowed: &[Task]) -> Result<ExitStatus> {
    let mut cfg = load(c, fallback)?;
    if let Some(task) = fallback {
        cfg.task = task;
    }
    if !allowed.contains(&cfg.task) {
        return Err(Error::Config(format!("task {} is not handled by this subcommand", cfg.task.name())));
    }
    let out = out_dir(c, Some(&cfg));
    let status = run_experiment(&cfg, Some(&out))?;
    eprintln!("wrote {}", out.display());
    Ok(status)
}

fn print_metrics(dir: &Path) -> Result<()> {
    let rows = read_metrics_csv(dir.join("metrics.csv"))?;
    let fmt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.6}"));
    println!("{:<28} {:>10} {:>7} {:>12} {:>12} {:>12} {:>9}", "task", "lambda", "eps", "error", "deviation", "tv", "converged");
    for r in rows {
        println!(
            "{:<28} {:>10} {:>7} {:>12} {:>12} {:>12} {:>9}",
            r.task,
            r.lambda_or_delta.map_or_else(|| "-".into(), |l| l.to_string()),
            r.epsilon.map_or_else(|| "-".into(), |e| e.to_string()),
            fmt(r.error),
            fmt(r.deviation),
            fmt(r.tv),
            r.converged
        );
    }
    Ok(())
}

fn replot(dir: &Path) -> Result<()> {
    #[derive(serde::Deserialize)]
    struct Plots {
        plots: Vec<NamedPlot>,
    }
    let text = std::fs::read_to_string(dir.join("report.json"))?;
    let plots: Plots = serde_json::from_str(&text)?;
    write_plots(&plots.plots, dir)?;
    eprintln!("wrote {} plot(s) to {}", plots.plots.len(), dir.display());
    Ok(())
}

fn dispatch(cmd: &Command) -> Result<ExitStatus> {
    match cmd {
        Command::Synth(c) => {
            let cfg = load(c, None)?;
            for p in write_synth(&cfg, out_dir(c, Some(&cfg)))? {
                eprintln!("wrote {}", p.display());
            }
            Ok(ExitStatus::Success)
        }
        Command::Train(c) => run_task(c, None, &[Task::Synth1d, Task::SynthMultilabel, Task::Sequence]),
        Command::FixedPoint(c) => run_task(c, Some(Task::FixedPoint), &[Task::FixedPoint]),
        Command::Bounds(c) => run_task(c, Some(Task::Bounds), &[Task::Bounds]),
        Command::Metrics(c) => print_metrics(&out_dir(c, None)).map(|_| ExitStatus::Success),
        Command::Plot(c) => replot(&out_dir(c, None)).map(|_| ExitStatus::Success),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli.command) {
        Ok(status) => ExitCode::from(status as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(ExitStatus::ConfigError as u8)
        }
    }
}
