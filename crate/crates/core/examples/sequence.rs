//! Sequence model trained against AR witnesses: a short lambda sweep.

use transparency_game::experiment::{execute, ExperimentConfig, Task};

fn main() -> transparency_game::Result<()> {
    let mut cfg = ExperimentConfig::new(Task::Sequence, 1);
    cfg.lambdas = Some(vec![0.0, 10.0]);
    cfg.sequence.train_sequences = 3;
    cfg.sequence.test_sequences = 2;
    let report = execute(&cfg)?;
    println!("{:<22} {:>8} {:>10} {:>10} {:>10}", "task", "lambda", "error", "deviation", "tv");
    for r in &report.rows {
        println!(
            "{:<22} {:>8} {:>10.4} {:>10.4} {:>10.4}",
            r.task,
            r.lambda_or_delta.map_or("-".into(), |v| v.to_string()),
            r.error.unwrap_or(f64::NAN),
            r.deviation.unwrap_or(f64::NAN),
            r.tv.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
