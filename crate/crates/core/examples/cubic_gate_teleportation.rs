//! Teleport the cubic phase gate V(γ) and check the outcome-dependent correction:
//! V R(q0, p0) V⁻¹ is a displacement followed by a shear of strength 3γq0.

use cvteleport::algebra::{clifford_decompose, conjugate_pauli, format_gate, GateSpec};
use cvteleport::fock::{FockState, FramedState, VectorPolicy};
use cvteleport::rng::trial_rng;
use cvteleport::teleport::{cvqt, teleport_gate, Backend, Squeezing, TeleportConfig, TeleportState};

fn main() -> cvteleport::Result<()> {
    let gamma = 0.05;
    let v = GateSpec::cubic(gamma);
    let corr = conjugate_pauli(&v, 1.0, 0.5)?;
    println!("V R(1, 0.5) V⁻¹ = {}", format_gate(&corr));
    let a = clifford_decompose(&corr)?;
    println!(
        "as an affine map: S = [[{:.3}, {:.3}], [{:.3}, {:.3}]], d = ({:.3}, {:.3})",
        a.s[[0, 0]],
        a.s[[0, 1]],
        a.s[[1, 0]],
        a.s[[1, 1]],
        a.d[0],
        a.d[1]
    );

    let mut cfg = TeleportConfig::new(Squeezing::Eta(0.99), 1.0, Backend::Fock)?;
    cfg.cutoff = 48;
    let input = TeleportState::Fock(FramedState::new(FockState::coherent(0.5, 0.0, 48), VectorPolicy::default())?);
    for t in 0..3 {
        let (a, rec) = teleport_gate(&v, &input, &cfg, &mut trial_rng(3, 0, t))?;
        let (b, _) = cvqt(&input, &cfg, &mut trial_rng(3, 0, t))?;
        let (TeleportState::Fock(a), TeleportState::Fock(mut b)) = (a, b) else { unreachable!() };
        b.apply_gate(&v)?;
        println!("outcome ({:+.3}, {:+.3}): fidelity with V after teleport = {:.12}", rec.q0, rec.p0, a.fidelity(&b)?);
    }
    Ok(())
}
