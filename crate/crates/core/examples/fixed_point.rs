//! Closed-form equilibria for a tabular predictor against linear witnesses.

use nalgebra::{DMatrix, DVector};
use transparency_game::equilibrium::{
    residual_theorem1, solve_exact, solve_fp_asymmetric, solve_fp_symmetric, FixedPointProblem, FpFamily, FpVariant,
};
use transparency_game::NeighborhoodSystem;

fn main() -> transparency_game::Result<()> {
    // Two points, one shared neighborhood: the equilibrium is (0.6, 2.7).
    let x = DMatrix::from_column_slice(2, 1, &[1.0, 2.0]);
    let y = DVector::from_vec(vec![0.0, 3.0]);
    let p = FixedPointProblem::new(x, y, NeighborhoodSystem::full(2)?, 1.0, FpFamily::Linear)?;
    let sol = solve_fp_symmetric(&p)?;
    println!("worked instance: f = {:?}, theta = {:?}, {} iterations", sol.f, sol.witness_params[0], sol.iterations);

    // A larger instance on circular windows.
    let n = 24;
    let x = DMatrix::from_fn(n, 2, |r, c| if c == 0 { 1.0 } else { (r as f64 * 0.7).sin() });
    let y = DVector::from_fn(n, |r, _| (r as f64 / 4.0).cos());
    let p = FixedPointProblem::new(x, y, NeighborhoodSystem::circular(n, 3)?, 2.0, FpFamily::Linear)?;
    for (variant, sol) in [(FpVariant::Symmetric, solve_fp_symmetric(&p)?), (FpVariant::Asymmetric, solve_fp_asymmetric(&p)?)] {
        let f = DVector::from_vec(sol.f.clone());
        let exact = solve_exact(&p, variant)?;
        println!(
            "{variant:?}: residual {:.2e}, distance to direct solve {:.2e}, direct fallback {}",
            residual_theorem1(&f, &p, variant)?,
            (f - exact).amax(),
            sol.direct
        );
    }
    Ok(())
}
