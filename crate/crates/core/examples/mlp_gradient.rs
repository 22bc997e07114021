//! Central-difference check of the MLP parameter gradient.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use transparency_game::predictor::{Activation, Mlp, OutputActivation, Predictor};

fn main() -> transparency_game::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut mlp = Mlp::new(&[3, 8, 2], Activation::Tanh, OutputActivation::Sigmoid, &mut rng)?;
    let x = DMatrix::from_fn(5, 3, |_, _| rng.random::<f64>() - 0.5);
    let up = DMatrix::from_fn(5, 2, |_, _| rng.random::<f64>() - 0.5);
    let analytic = mlp.param_gradient(&x, &up)?;
    let theta = mlp.params();
    let h = 1e-6;
    let mut worst = 0.0_f64;
    for k in 0..theta.len() {
        let mut p = theta.clone();
        p[k] += h;
        mlp.set_params(&p)?;
        let plus = mlp.predict(&x)?.dot(&up);
        p[k] -= 2.0 * h;
        mlp.set_params(&p)?;
        let minus = mlp.predict(&x)?.dot(&up);
        let numeric = (plus - minus) / (2.0 * h);
        worst = worst.max((analytic[k] - numeric).abs() / analytic[k].abs().max(numeric.abs()).max(1.0));
    }
    println!("{} parameters, max relative error {worst:.2e}", theta.len());
    Ok(())
}
