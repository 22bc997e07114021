//! Run a config-driven experiment and write report.json, metrics.csv and SVGs.

use std::path::Path;

use transparency_game::experiment::{run_experiment, ExperimentConfig};

fn main() -> transparency_game::Result<()> {
    let cfg = ExperimentConfig::from_json(
        r#"{ "task": "fixed_point", "seed": 0, "lambdas": [0.5, 1.0, 4.0] }"#,
    )?;
    let out = std::env::temp_dir().join("transparency-game-fixed-point");
    let status = run_experiment(&cfg, Some(Path::new(&out)))?;
    println!("exit status {status:?}, artifacts in {}", out.display());
    print!("{}", std::fs::read_to_string(out.join("metrics.csv"))?);
    Ok(())
}
