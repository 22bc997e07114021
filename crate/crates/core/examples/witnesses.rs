//! Fit every witness family on one neighborhood and print the deviations.

use nalgebra::DMatrix;
use transparency_game::witness::{TreeDepth, TreeLoss};
use transparency_game::WitnessFamily;

fn main() -> transparency_game::Result<()> {
    let x = DMatrix::from_fn(8, 1, |r, _| r as f64 / 7.0);
    let f = DMatrix::from_fn(8, 1, |r, _| if r < 4 { 0.2 * r as f64 } else { 1.5 - 0.1 * r as f64 });

    let families = [
        WitnessFamily::Constant,
        WitnessFamily::Linear { intercept: true },
        WitnessFamily::Ridge { alpha: 0.5, intercept: true },
        WitnessFamily::Tree { depth: TreeDepth::Fixed(1), loss: TreeLoss::Mse },
        WitnessFamily::Tree { depth: TreeDepth::Fixed(2), loss: TreeLoss::Mse },
    ];
    for family in families {
        let fit = family.fit(&x, &f)?;
        println!("{:<60} deviation {:.5}  params {:?}", format!("{family:?}"), fit.deviation, fit.params.flatten());
    }
    Ok(())
}
