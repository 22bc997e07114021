//! Train free per-anchor values under each game criterion on a noisy curve.

use nalgebra::DMatrix;
use transparency_game::game::{train, Criterion, GameConfig, GameData};
use transparency_game::predictor::TabularPredictor;
use transparency_game::{DeviationFn, NeighborhoodSystem, WitnessFamily};

fn main() -> transparency_game::Result<()> {
    let n = 30;
    let x = DMatrix::from_fn(n, 1, |r, _| r as f64 / (n - 1) as f64);
    let y = x.map(|v| (6.0 * v).sin() + 0.3 * (40.0 * v).cos());
    let data = GameData::new(x.clone(), x, y.clone())?;
    let ns = NeighborhoodSystem::window(n, 3)?;

    let criteria = [
        Criterion::Symmetric { lambda: 1.0 },
        Criterion::Asymmetric { lambda: 1.0 },
        Criterion::AdjustedSymmetric { lambda: 1.0 },
        Criterion::Uniform { delta: 0.01 },
    ];
    for criterion in criteria {
        let cfg = GameConfig {
            criterion,
            witness: WitnessFamily::Linear { intercept: true },
            outer_iterations: 5000,
            ..GameConfig::default()
        };
        let mut p = TabularPredictor::new(y.clone())?;
        let r = train(&mut p, &data, &ns, &cfg)?;
        let devs = r.final_deviations(&ns, DeviationFn::Squared)?;
        let max_dev = devs.iter().cloned().fold(0.0, f64::max);
        let mse = (&r.final_values - &y).norm_squared() / n as f64;
        println!(
            "{:<20} iterations {:>5} converged {:<5} mse {:.4} max deviation {:.4}",
            criterion.name(),
            r.iterations,
            r.converged,
            mse,
            max_dev
        );
    }
    Ok(())
}
