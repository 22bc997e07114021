//! Generalized AUC against the brute-force pair count, plus transparency scores.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use transparency_game::game::fit_witnesses;
use transparency_game::metrics::{generalized_auc, generalized_auc_brute, transparency_scores};
use transparency_game::witness::{TreeDepth, TreeLoss};
use transparency_game::{NeighborhoodSystem, WitnessFamily};

fn main() -> transparency_game::Result<()> {
    println!("binary example: {}", generalized_auc(&[0.0, 0.0, 1.0, 1.0], &[0.1, 0.4, 0.35, 0.8])?);

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let refs: Vec<f64> = (0..500).map(|_| rng.random_range(0..5) as f64).collect();
    let preds: Vec<f64> = refs.iter().map(|r| r + rng.random::<f64>() * 3.0).collect();
    println!("fast {:.6}  brute {:.6}", generalized_auc(&refs, &preds)?, generalized_auc_brute(&refs, &preds)?);

    let n = 40;
    let x = DMatrix::from_fn(n, 2, |_, _| rng.random_range(0..2) as f64);
    let y = DMatrix::from_fn(n, 1, |r, _| if x[(r, 0)] == 1.0 && x[(r, 1)] == 1.0 { 1.0 } else { 0.0 });
    let f = y.map(|v| 0.1 + 0.8 * v + 0.05 * rng.random::<f64>());
    let ns = NeighborhoodSystem::ball(&x, 1.5)?;
    let family = WitnessFamily::Tree { depth: TreeDepth::Fixed(2), loss: TreeLoss::Tv };
    let ws = fit_witnesses(&x, &f, &ns, family)?;
    let g = DMatrix::from_fn(n, 1, |i, _| {
        let pos = ns.position(i, i).expect("anchor in its own ball");
        ws[i].fitted_values[(pos, 0)]
    });
    let s = transparency_scores(&y, &f, &g, &ws, &ns)?;
    println!("AUC(f,y) {:.3} AUC(g,y) {:.3} AUC_B {:.3} AUC_D {:.3}", s.auc_f_y, s.auc_g_y, s.auc_b, s.auc_d);
    Ok(())
}
