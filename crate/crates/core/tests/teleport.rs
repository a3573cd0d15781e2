use ndarray::{s, Array1, Array2};
use num_complex::Complex64 as C64;

use cvteleport::algebra::GateSpec;
use cvteleport::fock::matrix::{dagger, displacement_matrix, gate_matrix_full, max_diff_mod_phase, ExpMethod};
use cvteleport::fock::{FockState, FramedState, VectorPolicy};
use cvteleport::phase_space::GaussianState;
use cvteleport::rng::trial_rng;
use cvteleport::teleport::{
    cvqt, detector_sigma, sigma_from, teleport_gate, transfer_gaussian, Backend, Squeezing, TeleportConfig, TeleportState,
};

fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, v.sqrt())
}

fn fock(cutoff: usize, eta: f64) -> TeleportConfig {
    let mut c = TeleportConfig::new(Squeezing::Eta(eta), 1.0, Backend::Fock).unwrap();
    c.cutoff = cutoff;
    c
}

fn framed(v: FockState) -> TeleportState {
    TeleportState::Fock(FramedState::new(v, VectorPolicy::default()).unwrap())
}

fn unwrap_fock(s: TeleportState) -> FramedState {
    match s {
        TeleportState::Fock(f) => f,
        _ => panic!("expected fock"),
    }
}

fn unwrap_gauss(s: TeleportState) -> GaussianState {
    match s {
        TeleportState::Gaussian(g) => g,
        _ => panic!("expected gaussian"),
    }
}

// For a coherent input at α the Kraus operator η^n̂ R(β)† maps to the coherent state η(α−β),
// so after correcting by β Bob holds a coherent state at β + η(α − β).
#[test]
fn coherent_input_output_follows_the_outcome_in_both_backends() {
    let eta = 0.5;
    let alpha = [1.0, -0.5];
    let gcfg = TeleportConfig::new(Squeezing::Eta(eta), 1.0, Backend::Gaussian).unwrap();
    let fcfg = fock(40, eta);
    for t in 0..5 {
        let (g, rec) =
            cvqt(&TeleportState::Gaussian(GaussianState::coherent(alpha[0], alpha[1])), &gcfg, &mut trial_rng(3, 0, t)).unwrap();
        let g = unwrap_gauss(g);
        for k in 0..2 {
            let beta = [rec.q0, rec.p0][k];
            assert!((g.mean()[k] - (beta + eta * (alpha[k] - beta))).abs() < 1e-10);
            assert!((g.cov()[[k, k]] - 0.5).abs() < 1e-10);
        }
        let (f, rec) = cvqt(&framed(FockState::coherent(alpha[0], alpha[1], 40)), &fcfg, &mut trial_rng(3, 0, t)).unwrap();
        let (m, c) = unwrap_fock(f).moments().unwrap();
        for k in 0..2 {
            let beta = [rec.q0, rec.p0][k];
            assert!((m[k] - (beta + eta * (alpha[k] - beta))).abs() < 1e-8);
            assert!((c[[k, k]] - 0.5).abs() < 1e-8);
        }
    }
}

// β for a coherent input is Gaussian around α with variance 1/(1 − η²) per coordinate.
#[test]
fn outcome_spread_matches_the_kraus_density() {
    let eta: f64 = 0.5;
    let want = 1.0 / (1.0 - eta * eta);
    let gcfg = TeleportConfig::new(Squeezing::Eta(eta), 1.0, Backend::Gaussian).unwrap();
    let input = TeleportState::Gaussian(GaussianState::coherent(0.4, 0.0));
    let n = 4000;
    let qs: Vec<f64> = (0..n).map(|t| cvqt(&input, &gcfg, &mut trial_rng(4, 0, t)).unwrap().1.q0).collect();
    let (m, sd) = mean_sd(&qs);
    assert!((m - 0.4).abs() < 4.0 * sd / (n as f64).sqrt());
    // the sample variance has standard error ≈ v√(2/n)
    assert!((sd * sd - want).abs() < 4.0 * want * (2.0 / n as f64).sqrt(), "{}", sd * sd);
}

// Non-Gaussian input: the density (1−η²)/(2π)‖η^n̂ R(β)†ψ‖², integrated on a grid,
// is normalised and reproduces the sampled second moment of β.
#[test]
fn single_photon_outcome_density() {
    let eta: f64 = 0.5;
    let cutoff = 30;
    let psi = FockState::number(&[1], cutoff);
    let filt: Array1<f64> = (0..cutoff).map(|n| eta.powi(n as i32)).collect();
    let (h, lim) = (0.125, 8.0);
    let pts: Vec<f64> = (0..=((2.0 * lim / h) as usize)).map(|i| -lim + i as f64 * h).collect();
    let (mut z, mut q2) = (0.0, 0.0);
    for &bq in &pts {
        for &bp in &pts {
            let v = dagger(&displacement_matrix(bq, bp, cutoff)).dot(psi.amplitudes());
            let w: f64 = v.iter().zip(filt.iter()).map(|(a, f)| (a * f).norm_sqr()).sum();
            let d = (1.0 - eta * eta) / (2.0 * std::f64::consts::PI) * w * h * h;
            z += d;
            q2 += d * bq * bq;
        }
    }
    assert!((z - 1.0).abs() < 1e-6, "{z}");
    // Husimi variance 3/2 + 1/2, plus thermal η²/(1−η²)
    assert!((q2 - (2.0 + 1.0 / 3.0)).abs() < 1e-6, "{q2}");

    let cfg = fock(cutoff, eta);
    let n = 1500;
    let input = framed(psi);
    let qs: Vec<f64> = (0..n).map(|t| cvqt(&input, &cfg, &mut trial_rng(5, 0, t)).unwrap().1.q0.powi(2)).collect();
    let (m, sd) = mean_sd(&qs);
    assert!((m - q2).abs() < 4.0 * sd / (n as f64).sqrt(), "{m} vs {q2}");
}

#[test]
fn closed_form_displacement_agrees_with_exponentiation() {
    let (q0, p0) = (0.9, -1.4);
    let big = gate_matrix_full(&GateSpec::displacement(q0, p0), 160, 1, ExpMethod::Pade).unwrap();
    let closed = displacement_matrix(q0, p0, 40);
    let diff = &big.slice(s![..40, ..40]).to_owned() - &closed;
    assert!(diff.iter().fold(0.0f64, |m, z| m.max(z.norm())) < 1e-10);
}

// The recorded correction, rebuilt as a matrix, equals V R(q0,p0) V† computed densely.
#[test]
fn cubic_correction_matches_dense_conjugation() {
    let gamma = 0.05;
    let cfg = fock(40, 0.9);
    let (_, rec) =
        teleport_gate(&GateSpec::cubic(gamma), &framed(FockState::coherent(0.5, 0.0, 40)), &cfg, &mut trial_rng(6, 0, 0))
            .unwrap();
    let (big, block) = (400, 20);
    let v = gate_matrix_full(&GateSpec::cubic(gamma), big, 1, ExpMethod::Eigh).unwrap();
    let dense = v.dot(&displacement_matrix(rec.q0, rec.p0, big)).dot(&dagger(&v));
    let corr = gate_matrix_full(&rec.correction, big, 1, ExpMethod::Eigh).unwrap();
    let a: Array2<C64> = dense.slice(s![..block, ..block]).to_owned();
    let b: Array2<C64> = corr.slice(s![..block, ..block]).to_owned();
    assert!(max_diff_mod_phase(&a, &b) < 1e-8, "{}", max_diff_mod_phase(&a, &b));
}

// With the same random stream, teleporting U equals teleporting the state and applying U.
#[test]
fn gate_teleportation_equals_gate_after_teleportation() {
    let cfg = fock(40, 0.7);
    let input = framed(FockState::coherent(0.6, 0.3, 40));
    for u in [GateSpec::cubic(0.05), GateSpec::squeezer(0.3), GateSpec::rotation(0.7)] {
        let (a, _) = teleport_gate(&u, &input, &cfg, &mut trial_rng(7, 0, 0)).unwrap();
        let (b, _) = cvqt(&input, &cfg, &mut trial_rng(7, 0, 0)).unwrap();
        let mut b = unwrap_fock(b);
        b.apply_gate(&u).unwrap();
        let f = unwrap_fock(a).fidelity(&b).unwrap();
        assert!((f - 1.0).abs() < 1e-8, "{u:?}: {f}");
    }
}

#[test]
fn noise_strengths_add() {
    let s0 = GaussianState::coherent(0.2, 0.1);
    let ab = transfer_gaussian(&transfer_gaussian(&s0, 0.3).unwrap(), 0.45).unwrap();
    let once = transfer_gaussian(&s0, 0.75).unwrap();
    assert!((ab.cov() - once.cov()).iter().all(|x| x.abs() < 1e-14));
    assert!((once.cov()[[0, 0]] - (0.5 + 0.375)).abs() < 1e-14);
    for (eta, nu) in [(0.0, 1.0), (0.5, 0.9), (0.9, 0.7)] {
        let s = sigma_from(eta, nu).unwrap();
        assert!((s - sigma_from(eta, 1.0).unwrap() - detector_sigma(nu)).abs() < 1e-14);
    }
    assert_eq!(sigma_from(1.0 / 3.0, 1.0).unwrap(), 0.5);
    assert!(sigma_from(1.0, 1.0).is_err() && sigma_from(0.5, 0.0).is_err());
}

// Averaged over outcomes, the protocol widens each quadrature by σ in total.
#[test]
fn protocol_added_variance_is_sigma() {
    let (eta, nu) = (0.5, 0.9);
    let cfg = TeleportConfig::new(Squeezing::Eta(eta), nu, Backend::Gaussian).unwrap();
    let sigma = cfg.sigma();
    let input = TeleportState::Gaussian(GaussianState::coherent(0.0, 0.0));
    let n = 4000;
    let mut qs = Vec::with_capacity(n);
    let mut cond = 0.0;
    for t in 0..n as u32 {
        let g = unwrap_gauss(cvqt(&input, &cfg, &mut trial_rng(8, 0, t)).unwrap().0);
        qs.push(g.mean()[0]);
        cond = g.cov()[[0, 0]];
    }
    let (_, sd) = mean_sd(&qs);
    let total = sd * sd + cond;
    let se = sd * sd * (2.0 / n as f64).sqrt();
    assert!((total - (0.5 + sigma)).abs() < 4.0 * se, "{total} vs {}", 0.5 + sigma);
}

// Coherent input, ensemble fidelity 1/(1 + σ) in both backends.
#[test]
fn mean_fidelity_is_one_over_one_plus_sigma() {
    let eta = 0.5;
    let want = 1.0 / (1.0 + sigma_from(eta, 1.0).unwrap());
    let target = GaussianState::coherent(1.0, 1.0);
    let gcfg = TeleportConfig::new(Squeezing::Eta(eta), 1.0, Backend::Gaussian).unwrap();
    let gs: Vec<f64> = (0..4000)
        .map(|t| {
            let g = unwrap_gauss(cvqt(&TeleportState::Gaussian(target.clone()), &gcfg, &mut trial_rng(9, 0, t)).unwrap().0);
            cvteleport::phase_space::fidelity_gaussian(&g, &target).unwrap()
        })
        .collect();
    let (m, sd) = mean_sd(&gs);
    assert!((m - want).abs() < 4.0 * sd / 4000f64.sqrt(), "gaussian {m}");

    let cfg = fock(40, eta);
    let t_f = FockState::coherent(1.0, 1.0, 40);
    let input = framed(t_f.clone());
    let fs: Vec<f64> = (0..300)
        .map(|t| unwrap_fock(cvqt(&input, &cfg, &mut trial_rng(9, 1, t)).unwrap().0).fidelity_to(&t_f).unwrap())
        .collect();
    let (m, sd) = mean_sd(&fs);
    assert!((m - want).abs() < 4.0 * sd / 300f64.sqrt(), "fock {m}");
}

// Near-ideal resource: σ = 0.005, so the mean fidelity sits at 1/(1+σ) ≈ 0.995 rather than 1.
#[test]
fn near_ideal_resource_fidelity() {
    let eta = 0.99;
    let want = 1.0 / (1.0 + sigma_from(eta, 1.0).unwrap());
    let cfg = fock(48, eta);
    let t_f = FockState::coherent(0.5, 0.0, 48);
    let input = framed(t_f.clone());
    let fs: Vec<f64> = (0..200)
        .map(|t| unwrap_fock(cvqt(&input, &cfg, &mut trial_rng(10, 0, t)).unwrap().0).fidelity_to(&t_f).unwrap())
        .collect();
    let (m, sd) = mean_sd(&fs);
    assert!((m - want).abs() < 3.0 * sd / 200f64.sqrt() && m > 0.99, "{m}");
}
