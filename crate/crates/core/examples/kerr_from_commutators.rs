//! The Kerr gate has no polynomial conjugation images, so it cannot be teleported directly.
//! Group commutators of teleportable gates approach exp(i[A,B]t²) with an O(t³) error.

use cvteleport::algebra::parse_polynomial;
use cvteleport::teleport::{commutator_error, loglog_slope};

fn main() -> cvteleport::Result<()> {
    let a = parse_polynomial("q^3", Some(1))?;
    let b = parse_polynomial("0.5*p^2", Some(1))?;
    println!("[A, B] = {}", a.commutator(&b)?);
    let ts = [0.02, 0.01, 0.005];
    let mut errs = Vec::new();
    for &t in &ts {
        let (e, conv) = commutator_error(&a, &b, t, 48, 24, 1e-10, 400)?;
        println!("t = {t:<6} error {e:.3e} (working cutoff {}, converged {})", conv.working_cutoff, conv.converged);
        errs.push(e);
    }
    println!("log-log slope {:.3}", loglog_slope(&ts, &errs));
    Ok(())
}
