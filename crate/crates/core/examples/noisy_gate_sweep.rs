//! Compare the noisy-gate model ℰ_U ∘ ℰ_σ with the teleported squeezer across η.

use cvteleport::algebra::GateSpec;
use cvteleport::phase_space::GaussianState;
use cvteleport::rng::trial_rng;
use cvteleport::teleport::{compose_noisy_gate, teleport_gate, Backend, Squeezing, TeleportConfig, TeleportState};

fn main() -> cvteleport::Result<()> {
    let u = GateSpec::squeezer(0.3);
    let input = GaussianState::coherent(1.0, 0.5);
    println!("eta    sigma    protocol <q²>  model(σ) <q²>  model(2σ) <q²>");
    for eta in [0.5, 0.76, 0.9] {
        let cfg = TeleportConfig::new(Squeezing::Eta(eta), 1.0, Backend::Gaussian)?;
        let n = 5000;
        let mut q2 = 0.0;
        for t in 0..n {
            let (out, _) = teleport_gate(&u, &TeleportState::Gaussian(input.clone()), &cfg, &mut trial_rng(5, 0, t))?;
            let TeleportState::Gaussian(g) = out else { unreachable!() };
            q2 += (g.cov()[[0, 0]] + g.mean()[0].powi(2)) / n as f64;
        }
        let second = |s: f64| -> cvteleport::Result<f64> {
            let m = compose_noisy_gate(u.clone(), s, None)?.apply_gaussian(&input, &mut trial_rng(0, 0, 0))?;
            Ok(m.cov()[[0, 0]] + m.mean()[0].powi(2))
        };
        println!("{eta:<6} {:<8.4} {q2:<14.4} {:<14.4} {:.4}", cfg.sigma(), second(cfg.sigma())?, second(2.0 * cfg.sigma())?);
    }
    Ok(())
}
