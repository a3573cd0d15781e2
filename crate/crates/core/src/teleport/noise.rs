//! Teleportation noise: σ(η, ν), the Gaussian displacement channel ℰ_σ, bounded linear
//! errors, and the noisy-gate model built from them.

use std::fmt;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::algebra::{clifford_decompose, format_gate, AffineSymplectic, GateSpec};
use crate::error::{Error, Result};
use crate::fock::FramedState;
use crate::phase_space::{add_gaussian_noise, apply_gate, GaussianState};

/// Noise strength σ = e^{−2 atanh η} + (1 − ν²)/ν², with the first term as (1−η)/(1+η).
pub fn sigma_from(eta: f64, nu: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&eta) {
        return Err(Error::Domain(format!("η must lie in [0, 1), got {eta}")));
    }
    if !(nu > 0.0 && nu <= 1.0) {
        return Err(Error::Domain(format!("ν must lie in (0, 1], got {nu}")));
    }
    // (1−η)/(1+η) written with a reciprocal: it rounds η = 1/3 to exactly 1/2
    Ok((1.0 - eta) * (1.0 + eta).recip() + detector_sigma(nu))
}

/// The detector part (1 − ν²)/ν² alone.
pub fn detector_sigma(nu: f64) -> f64 {
    (1.0 - nu * nu) / (nu * nu)
}

fn kernel(sigma: f64) -> Result<Normal<f64>> {
    if !(sigma >= 0.0) {
        return Err(Error::Domain(format!("noise strength must be non-negative, got {sigma}")));
    }
    Normal::new(0.0, (sigma / 2.0).sqrt()).map_err(|e| Error::Domain(e.to_string()))
}

/// One draw (q, p) from the ℰ_σ kernel exp(−(q²+p²)/σ)/(πσ): variance σ/2 per coordinate.
pub fn sample_kernel<R: Rng + ?Sized>(sigma: f64, rng: &mut R) -> Result<(f64, f64)> {
    let k = kernel(sigma)?;
    Ok((k.sample(rng), k.sample(rng)))
}

/// ℰ_σ on a Gaussian state: exact, cov += (σ/2)·I on every mode.
pub fn transfer_gaussian(s: &GaussianState, sigma: f64) -> Result<GaussianState> {
    let modes: Vec<usize> = (0..s.nmodes()).collect();
    add_gaussian_noise(s, sigma, &modes)
}

/// One Monte Carlo member of ℰ_σ(ρ): a random displacement R(q, p) from the kernel.
pub fn transfer_fock<R: Rng + ?Sized>(s: &FramedState, sigma: f64, rng: &mut R) -> Result<FramedState> {
    let (q, p) = sample_kernel(sigma, rng)?;
    let mut out = s.clone();
    out.apply_affine(&AffineSymplectic::displacement(q, p));
    Ok(out)
}

/// Occasional small displacement errors confined to the disk δq² + δp² < S².
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearErrorModel {
    pub max_s: f64,
    /// Per-coordinate standard deviation before truncation to the disk.
    pub scale: f64,
    /// Chance that a given gate suffers an error at all.
    pub probability: f64,
}

impl LinearErrorModel {
    pub fn new(max_s: f64, scale: f64, probability: f64) -> Result<Self> {
        if !(max_s > 0.0) || !(scale > 0.0) || !(0.0..=1.0).contains(&probability) {
            return Err(Error::Domain(format!(
                "linear error model needs S > 0, scale > 0, probability in [0, 1]; got ({max_s}, {scale}, {probability})"
            )));
        }
        Ok(LinearErrorModel { max_s, scale, probability })
    }

    /// Draw an error, or `None` when this gate is clean.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<(f64, f64)> {
        let hit: f64 = rng.random();
        if hit >= self.probability {
            return None;
        }
        let n = Normal::new(0.0, self.scale).expect("positive scale");
        loop {
            let (dq, dp) = (n.sample(rng), n.sample(rng));
            if dq * dq + dp * dp < self.max_s * self.max_s {
                return Some((dq, dp));
            }
        }
    }
}

/// A teleported gate with its noise: optional linear error, then ℰ_σ, then U.
#[derive(Clone, Debug, PartialEq)]
pub struct NoisyGate {
    pub gate: GateSpec,
    pub sigma: f64,
    pub error: Option<LinearErrorModel>,
}

pub fn compose_noisy_gate(gate: GateSpec, sigma: f64, error: Option<LinearErrorModel>) -> Result<NoisyGate> {
    kernel(sigma)?;
    Ok(NoisyGate { gate, sigma, error })
}

impl NoisyGate {
    /// One run of the channel on a Gaussian state.
    ///
    /// The ℰ_σ step is exact on moments; only the linear error is random.
    pub fn apply_gaussian<R: Rng + ?Sized>(&self, s: &GaussianState, rng: &mut R) -> Result<GaussianState> {
        let mut st = s.clone();
        if let Some((dq, dp)) = self.error.and_then(|e| e.sample(rng)) {
            st = apply_gate(&GateSpec::displacement(dq, dp).embed(st.nmodes()), &st)?;
        }
        st = transfer_gaussian(&st, self.sigma)?;
        apply_gate(&self.gate, &st)
    }

    /// One Monte Carlo member of the channel output in the Fock backend.
    pub fn apply_fock<R: Rng + ?Sized>(&self, s: &FramedState, rng: &mut R) -> Result<FramedState> {
        let mut st = s.clone();
        if let Some((dq, dp)) = self.error.and_then(|e| e.sample(rng)) {
            st.apply_affine(&AffineSymplectic::displacement(dq, dp));
        }
        st = transfer_fock(&st, self.sigma, rng)?;
        st.apply_gate(&self.gate)?;
        Ok(st)
    }

    /// Whether the channel reduces to the bare gate.
    pub fn is_noiseless(&self) -> bool {
        self.sigma == 0.0 && self.error.is_none_or(|e| e.probability == 0.0)
    }

    /// The bare gate as an affine map, when it is Gaussian.
    pub fn gate_affine(&self) -> Result<AffineSymplectic> {
        clifford_decompose(&self.gate)
    }
}

impl fmt::Display for NoisyGate {
    /// `(channel <gate> (sigma s) [(linear-error S scale p)])`
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(channel {} (sigma {})", format_gate(&self.gate), self.sigma)?;
        if let Some(e) = &self.error {
            write!(f, " (linear-error {} {} {})", e.max_s, e.scale, e.probability)?;
        }
        write!(f, ")")
    }
}
