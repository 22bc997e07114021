use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use transparency_game::equilibrium::*;
use transparency_game::NeighborhoodSystem;
fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for t in 0..20000 {
        let n = rng.random_range(3..=8);
        let d = rng.random_range(1..=2);
        let eps = 1;
        let lambda = 10.0;
        let x = DMatrix::from_fn(n, d, |_, _| ((rng.random::<f64>() * 2.0 - 1.0) * 4.0).round() / 4.0);
        let y = DVector::from_fn(n, |_, _| ((rng.random::<f64>() * 4.0 - 2.0) * 2.0).round() / 2.0);
        let ns = NeighborhoodSystem::circular(n, eps).unwrap();
        let Ok(p) = FixedPointProblem::new(x.clone(), y.clone(), ns, lambda, FpFamily::Linear) else { continue };
        let it = iterate_fixed_point(&p, FpVariant::Asymmetric, SolveOptions::games(), None).unwrap();
        if !it.converged {
            let s = solve_fp_asymmetric(&p);
            println!("t={t} n={n} d={d} x={:?} y={:?} direct ok={:?}", x.as_slice(), y.as_slice(), s.map(|s| (s.direct, s.residual)));
            break;
        }
    }
}
