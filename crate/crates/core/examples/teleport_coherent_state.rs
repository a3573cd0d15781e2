//! Teleport a coherent state through a finite-squeezing EPR pair and compare the
//! average fidelity with 1/(1 + σ).

use cvteleport::fock::{FockState, FramedState, VectorPolicy};
use cvteleport::phase_space::{fidelity_gaussian, GaussianState};
use cvteleport::rng::trial_rng;
use cvteleport::teleport::{cvqt, Backend, Squeezing, TeleportConfig, TeleportState};

fn main() -> cvteleport::Result<()> {
    let (q, p) = (1.0, -0.5);
    for eta in [0.3, 0.6, 0.9] {
        let cfg = TeleportConfig::new(Squeezing::Eta(eta), 1.0, Backend::Gaussian)?;
        let target = GaussianState::coherent(q, p);
        let mut f = 0.0;
        for t in 0..2000 {
            let (out, _) = cvqt(&TeleportState::Gaussian(target.clone()), &cfg, &mut trial_rng(1, 0, t))?;
            let TeleportState::Gaussian(g) = out else { unreachable!() };
            f += fidelity_gaussian(&g, &target)? / 2000.0;
        }

        let mut fcfg = TeleportConfig::new(Squeezing::Eta(eta), 1.0, Backend::Fock)?;
        fcfg.cutoff = 40;
        let vec = FockState::coherent(q, p, fcfg.cutoff);
        let input = TeleportState::Fock(FramedState::new(vec.clone(), VectorPolicy::default())?);
        let n = 200;
        let mut fs = Vec::with_capacity(n);
        for t in 0..n as u32 {
            let (out, _) = cvqt(&input, &fcfg, &mut trial_rng(2, 0, t))?;
            let TeleportState::Fock(s) = out else { unreachable!() };
            fs.push(s.fidelity_to(&vec)?);
        }
        let (ff, se) = cvteleport::experiments::mean_stderr(&fs);
        println!(
            "η = {eta}: σ = {:.4}, 1/(1+σ) = {:.4}, gaussian {f:.4}, fock {ff:.4} ± {se:.4}",
            cfg.sigma(),
            1.0 / (1.0 + cfg.sigma())
        );
    }
    Ok(())
}
