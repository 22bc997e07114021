//! Same error, different witnesses: linear and stump-trained fits on a 1-D curve.

use transparency_game::experiment::{execute, ExperimentConfig, Task};

fn main() -> transparency_game::Result<()> {
    let report = execute(&ExperimentConfig::new(Task::Synth1d, 3))?;
    println!("{}", serde_json::to_string_pretty(&report.details["runs"])?);
    for row in &report.rows {
        println!("{} lambda {:?} error {:?}", row.task, row.lambda_or_delta, row.error);
    }
    Ok(())
}
