//! The teleportation circuit: Bell-type measurement of the input against half of an EPR
//! pair, two classical outcomes (q0, p0), and a conditional correction on the other half.
//!
//! Measurement: the input (mode 1) and Alice's EPR mode (mode 2) meet on a 50:50
//! beamsplitter; homodyne q on one port and p on the other read out (q̂₁ − q̂₂)/√2 and
//! (p̂₁ + p̂₂)/√2. The √2 is absorbed into q0, p0, which then drive the unit-gain correction
//! R(q0, p0) on Bob's mode 3. For gate teleportation U acts on mode 3 before the
//! measurement and the correction becomes U R(q0, p0) U⁻¹.

use std::f64::consts::{FRAC_PI_4, SQRT_2};

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize, Serializer};

use super::noise::detector_sigma;
use crate::algebra::{
    classify, clifford_decompose, conjugate_pauli, format_gate, AffineSymplectic, CanonicalPolynomial, GateSpec, HierarchyLevel,
};
use crate::error::{Error, Result};
use crate::fock::homodyne::heterodyne_sample;
use crate::fock::{FockState, FramedState, VectorPolicy};
use crate::phase_space::{apply_affine, epr_pair, homodyne_marginal, homodyne_measure, GaussianState, Quadrature};

/// EPR resource strength, given either as η or as the squeezing r (η = tanh r).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Squeezing {
    Eta(f64),
    R(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    #[default]
    Gaussian,
    Fock,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TeleportConfig {
    pub squeezing: Squeezing,
    /// Detector efficiency ν.
    pub nu: f64,
    pub backend: Backend,
    /// Fock cutoff for states built from this config.
    pub cutoff: usize,
    pub seed: u64,
    pub trials: usize,
    pub policy: VectorPolicy,
}

impl TeleportConfig {
    pub fn new(squeezing: Squeezing, nu: f64, backend: Backend) -> Result<Self> {
        let trials = match backend {
            Backend::Gaussian => 10_000,
            Backend::Fock => 2_000,
        };
        let cfg = TeleportConfig { squeezing, nu, backend, cutoff: 48, seed: 0, trials, policy: VectorPolicy::default() };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        match self.squeezing {
            Squeezing::Eta(e) if !(0.0..1.0).contains(&e) => return Err(Error::Domain(format!("η must lie in [0, 1), got {e}"))),
            Squeezing::R(r) if !(r >= 0.0 && r.is_finite()) => {
                return Err(Error::Domain(format!("r must be finite and non-negative, got {r}")))
            }
            _ => {}
        }
        if !(self.nu > 0.0 && self.nu <= 1.0) {
            return Err(Error::Domain(format!("ν must lie in (0, 1], got {}", self.nu)));
        }
        if self.backend == Backend::Fock && self.cutoff < 2 {
            return Err(Error::Domain(format!("cutoff must be at least 2, got {}", self.cutoff)));
        }
        Ok(())
    }

    pub fn eta(&self) -> f64 {
        match self.squeezing {
            Squeezing::Eta(e) => e,
            Squeezing::R(r) => r.tanh(),
        }
    }

    pub fn r(&self) -> f64 {
        match self.squeezing {
            Squeezing::Eta(e) => e.atanh(),
            Squeezing::R(r) => r,
        }
    }

    /// σ(η, ν), recomputed from the squeezing each time.
    pub fn sigma(&self) -> f64 {
        let resource = match self.squeezing {
            Squeezing::Eta(e) => (1.0 - e) * (1.0 + e).recip(),
            Squeezing::R(r) => (-2.0 * r).exp(),
        };
        resource + detector_sigma(self.nu)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Diagnostics {
    /// Largest working-cutoff refinement change (Fock).
    pub truncation_change: f64,
    pub converged: bool,
    /// 1 − ‖ψ‖² of the input vector (Fock).
    pub deficit: f64,
    /// Variances of the two homodyne readouts before conditioning (Gaussian).
    pub conditional_variances: Option<[f64; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OutcomeRecord {
    /// The reported outcomes that drive the correction.
    pub q0: f64,
    pub p0: f64,
    /// Outcomes before detector noise.
    pub ideal_q0: f64,
    pub ideal_p0: f64,
    #[serde(serialize_with = "gate_text")]
    pub correction: GateSpec,
    pub diagnostics: Diagnostics,
}

fn gate_text<S: Serializer>(g: &GateSpec, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format_gate(g))
}

impl OutcomeRecord {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("plain data")
    }
}

/// Protocol state in either backend.
#[derive(Clone, Debug)]
pub enum TeleportState {
    Gaussian(GaussianState),
    Fock(FramedState),
}

pub fn cvqt<R: Rng + ?Sized>(state: &TeleportState, cfg: &TeleportConfig, rng: &mut R) -> Result<(TeleportState, OutcomeRecord)> {
    run(None, state, cfg, rng)
}

pub fn teleport_gate<R: Rng + ?Sized>(
    u: &GateSpec,
    state: &TeleportState,
    cfg: &TeleportConfig,
    rng: &mut R,
) -> Result<(TeleportState, OutcomeRecord)> {
    run(Some(u), state, cfg, rng)
}

fn run<R: Rng + ?Sized>(
    u: Option<&GateSpec>,
    state: &TeleportState,
    cfg: &TeleportConfig,
    rng: &mut R,
) -> Result<(TeleportState, OutcomeRecord)> {
    cfg.validate()?;
    if let Some(u) = u {
        check_teleportable(u, cfg.backend)?;
    }
    match (state, cfg.backend) {
        (TeleportState::Gaussian(s), Backend::Gaussian) => {
            let (out, rec) = run_gaussian(u, s, cfg, rng)?;
            Ok((TeleportState::Gaussian(out), rec))
        }
        (TeleportState::Fock(s), Backend::Fock) => {
            let (out, rec) = run_fock(u, s, cfg, rng)?;
            Ok((TeleportState::Fock(out), rec))
        }
        _ => Err(Error::Domain("state representation does not match the configured backend".into())),
    }
}

/// Teleportable gates are single-mode and sit at most at level 3 of the hierarchy.
pub fn check_teleportable(u: &GateSpec, backend: Backend) -> Result<()> {
    if u.nmodes() != 1 {
        return Err(Error::GateNotTeleportable(format!("{}-mode gate; the teleporter carries one mode", u.nmodes())));
    }
    match classify(u, 3) {
        Ok(HierarchyLevel::Level(_)) => {}
        Ok(HierarchyLevel::NotDetermined(_)) => {
            return Err(Error::GateNotTeleportable("level above 3; compose it from group commutators".into()))
        }
        Err(Error::NonTerminatingAdjoint(_)) => {
            return Err(Error::GateNotTeleportable(
                "conjugated Paulis are not polynomial; compose it from group commutators".into(),
            ))
        }
        Err(e) => return Err(e),
    }
    if backend == Backend::Gaussian && u.max_degree() > 2 {
        return Err(Error::Domain("non-Gaussian gates need the fock backend".into()));
    }
    Ok(())
}

/// The correction for outcomes (q0, p0): R(q0, p0), or U R(q0, p0) U⁻¹ reduced to its affine form.
pub fn correction_for(u: Option<&GateSpec>, q0: f64, p0: f64) -> Result<AffineSymplectic> {
    match u {
        None => Ok(AffineSymplectic::displacement(q0, p0)),
        Some(u) => clifford_decompose(&conjugate_pauli(u, q0, p0)?),
    }
}

fn detector_noise<R: Rng + ?Sized>(nu: f64, ideal: (f64, f64), rng: &mut R) -> (f64, f64) {
    let v = detector_sigma(nu);
    if v == 0.0 {
        return ideal;
    }
    let n = Normal::new(0.0, v.sqrt()).expect("positive variance");
    (ideal.0 + n.sample(rng), ideal.1 + n.sample(rng))
}

fn run_gaussian<R: Rng + ?Sized>(
    u: Option<&GateSpec>,
    input: &GaussianState,
    cfg: &TeleportConfig,
    rng: &mut R,
) -> Result<(GaussianState, OutcomeRecord)> {
    if input.nmodes() != 1 {
        return Err(Error::ModeMismatch(input.nmodes(), 1));
    }
    let mut st = input.tensor(&epr_pair(cfg.r()));
    if let Some(u) = u {
        st = apply_affine(&clifford_decompose(u)?.embed(3, 2), &st)?;
    }
    let bs = match GateSpec::beamsplitter(FRAC_PI_4, 0, 1, 3) {
        GateSpec::Affine(a) => a,
        _ => unreachable!(),
    };
    st = apply_affine(&bs, &st)?;
    let (_, var_q) = homodyne_marginal(&st, 0, Quadrature::Q);
    let (x, st) = homodyne_measure(&st, 0, Quadrature::Q, rng)?;
    let (_, var_p) = homodyne_marginal(&st, 0, Quadrature::P);
    let (y, st) = homodyne_measure(&st, 0, Quadrature::P, rng)?;
    let ideal = (SQRT_2 * x, SQRT_2 * y);
    let (q0, p0) = detector_noise(cfg.nu, ideal, rng);
    let corr = correction_for(u, q0, p0)?;
    let out = apply_affine(&corr, &st)?;
    let rec = OutcomeRecord {
        q0,
        p0,
        ideal_q0: ideal.0,
        ideal_p0: ideal.1,
        correction: GateSpec::Affine(corr),
        diagnostics: Diagnostics {
            truncation_change: 0.0,
            converged: true,
            deficit: 0.0,
            conditional_variances: Some([var_q, var_p]),
        },
    };
    Ok((out, rec))
}

/// Fock backend.
///
/// Projecting the input and Alice's half of Σ ηⁿ|n,n⟩ onto the displaced EPR state for
/// outcome β leaves Bob with η^n̂ R(β)†|ψ⟩, and β has density (1−η²)/(2π)·‖η^n̂ R(β)†ψ‖².
/// That density is the Husimi function of ψ smeared by a thermal kernel of mean photon
/// number η²/(1−η²), so β is drawn as a heterodyne outcome plus independent thermal noise,
/// and Bob's mode is then computed from the one-mode Kraus operator.
fn run_fock<R: Rng + ?Sized>(
    u: Option<&GateSpec>,
    input: &FramedState,
    cfg: &TeleportConfig,
    rng: &mut R,
) -> Result<(FramedState, OutcomeRecord)> {
    let eta = cfg.eta();
    let mut st = input.clone();
    let sdev = st.frame.s.iter().zip(ndarray::Array2::<f64>::eye(2).iter()).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    if sdev > 1e-12 {
        // a non-trivial symplectic frame would reshape the Husimi function; fold it into the vector
        let policy = st.policy;
        let change = st.truncation_change;
        let converged = st.converged;
        st = FramedState::new(st.materialize()?, policy)?;
        st.truncation_change = change;
        st.converged = converged;
    }
    let deficit = st.vector.deficit();
    let (hq, hp) = heterodyne_sample(&st.vector.normalized()?, rng)?;
    let nbar = eta * eta / (1.0 - eta * eta);
    let (gq, gp) = if nbar > 0.0 {
        let n = Normal::new(0.0, nbar.sqrt()).expect("positive variance");
        (n.sample(rng), n.sample(rng))
    } else {
        (0.0, 0.0)
    };
    let beta = (hq + st.frame.d[0] + gq, hp + st.frame.d[1] + gp);
    let (q0, p0) = detector_noise(cfg.nu, beta, rng);

    if eta == 0.0 {
        st.reset(FockState::vacuum(st.cutoff(), 1));
    } else {
        st.apply_affine(&AffineSymplectic::displacement(-beta.0, -beta.1));
        st.apply_filter(&CanonicalPolynomial::number(0, 1), eta.ln())?;
    }
    if let Some(u) = u {
        st.apply_gate(u)?;
    }
    let corr = correction_for(u, q0, p0)?;
    st.apply_affine(&corr);
    let rec = OutcomeRecord {
        q0,
        p0,
        ideal_q0: beta.0,
        ideal_p0: beta.1,
        correction: GateSpec::Affine(corr),
        diagnostics: Diagnostics {
            truncation_change: st.truncation_change,
            converged: st.converged,
            deficit,
            conditional_variances: None,
        },
    };
    Ok((st, rec))
}
