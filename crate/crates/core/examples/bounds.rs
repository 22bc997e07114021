//! Effective neighborhood sizes of linear and tree witnesses.

use transparency_game::metrics::{verify_bound_linear, verify_bound_tree};

fn main() -> transparency_game::Result<()> {
    for d in 1..=4 {
        let r = verify_bound_linear(d)?;
        println!(
            "linear d={d}: below {:.2e} at bound {:.3e} passed {}",
            r.below_max_deviation, r.at_bound_deviation, r.passed
        );
    }
    for k in 1..=3 {
        let r = verify_bound_tree(k)?;
        println!("tree k={k}: below {:.2e} at bound {:.3e} passed {}", r.below_max_deviation, r.at_bound_deviation, r.passed);
    }
    Ok(())
}
