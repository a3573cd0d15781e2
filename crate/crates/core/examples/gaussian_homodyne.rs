//! Homodyne conditioning of an EPR pair: measuring q on one mode squeezes the other.

use cvteleport::phase_space::{epr_pair, homodyne_condition, Quadrature};

fn main() -> cvteleport::Result<()> {
    for r in [0.5, 1.0, 2.0] {
        let pair = epr_pair(r);
        let cond = homodyne_condition(&pair, 0, Quadrature::Q, 0.8)?;
        println!(
            "r = {r}: conditional mean ({:+.4}, {:+.4}), Var q = {:.4}, Var p = {:.4}",
            cond.mean()[0],
            cond.mean()[1],
            cond.cov()[[0, 0]],
            cond.cov()[[1, 1]]
        );
    }
    Ok(())
}
