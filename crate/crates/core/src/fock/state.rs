use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use serde::Serialize;

use super::matrix::{embedding_indices, operator_matrix, OperatorMatrix};
use crate::algebra::CanonicalPolynomial;
use crate::error::{Error, Result};

/// Pure state on the truncated number basis; index Σ n_i N^(m−1−i).
#[derive(Clone, Debug, PartialEq)]
pub struct FockState {
    amps: Array1<C64>,
    cutoff: usize,
    nmodes: usize,
}

#[derive(Serialize)]
struct FockRecord {
    nmodes: usize,
    cutoff: usize,
    amplitudes: Vec<(usize, f64, f64)>,
}

impl FockState {
    pub fn from_amplitudes(amps: Array1<C64>, cutoff: usize, nmodes: usize) -> Result<Self> {
        if amps.len() != cutoff.pow(nmodes as u32) {
            return Err(Error::Domain(format!("{} amplitudes do not fit {nmodes} modes at cutoff {cutoff}", amps.len())));
        }
        Ok(FockState { amps, cutoff, nmodes })
    }

    pub fn vacuum(cutoff: usize, nmodes: usize) -> Self {
        Self::number(&vec![0; nmodes], cutoff)
    }

    /// |n_0, n_1, ...⟩
    pub fn number(ns: &[usize], cutoff: usize) -> Self {
        let m = ns.len();
        let mut amps = Array1::zeros(cutoff.pow(m as u32));
        let idx = ns.iter().fold(0, |acc, &n| {
            assert!(n < cutoff);
            acc * cutoff + n
        });
        amps[idx] = C64::new(1.0, 0.0);
        FockState { amps, cutoff, nmodes: m }
    }

    /// Coherent state with ⟨q⟩ = q0, ⟨p⟩ = p0 (truncated, not renormalized).
    pub fn coherent(q0: f64, p0: f64, cutoff: usize) -> Self {
        let alpha = C64::new(q0, p0) * std::f64::consts::FRAC_1_SQRT_2;
        let mut amps = Array1::zeros(cutoff);
        let mut c = C64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
        for n in 0..cutoff {
            if n > 0 {
                c = c * alpha / (n as f64).sqrt();
            }
            amps[n] = c;
        }
        FockState { amps, cutoff, nmodes: 1 }
    }

    /// The zero-mode state.
    pub fn scalar(c: C64) -> Self {
        FockState { amps: Array1::from(vec![c]), cutoff: 1, nmodes: 0 }
    }

    pub fn amplitudes(&self) -> &Array1<C64> {
        &self.amps
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn nmodes(&self) -> usize {
        self.nmodes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum()
    }

    /// 1 − ‖ψ‖².
    pub fn deficit(&self) -> f64 {
        1.0 - self.norm_sqr()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm_sqr().sqrt();
        if !(n > 1e-150) {
            return Err(Error::Truncation("state norm underflow".into()));
        }
        Ok(FockState { amps: self.amps.mapv(|z| z / n), ..self.clone() })
    }

    pub fn scaled(&self, c: C64) -> Self {
        FockState { amps: self.amps.mapv(|z| z * c), ..self.clone() }
    }

    pub fn apply(&self, op: &OperatorMatrix) -> Result<Self> {
        self.apply_matrix(&op.matrix)
    }

    pub fn apply_matrix(&self, m: &Array2<C64>) -> Result<Self> {
        if m.ncols() != self.amps.len() {
            return Err(Error::Domain(format!("operator of size {} on state of size {}", m.ncols(), self.amps.len())));
        }
        Ok(FockState { amps: m.dot(&self.amps), ..self.clone() })
    }

    pub fn inner(&self, other: &FockState) -> Result<C64> {
        self.check_shape(other)?;
        Ok(self.amps.iter().zip(other.amps.iter()).map(|(a, b)| a.conj() * b).sum())
    }

    fn check_shape(&self, other: &FockState) -> Result<()> {
        if self.cutoff != other.cutoff || self.nmodes != other.nmodes {
            return Err(Error::Domain(format!(
                "shape mismatch: ({} modes, N={}) vs ({} modes, N={})",
                self.nmodes, self.cutoff, other.nmodes, other.cutoff
            )));
        }
        Ok(())
    }

    /// Same state on a larger per-mode cutoff.
    pub fn embed(&self, cutoff: usize) -> FockState {
        assert!(cutoff >= self.cutoff);
        if cutoff == self.cutoff {
            return self.clone();
        }
        let mut amps = Array1::zeros(cutoff.pow(self.nmodes as u32));
        for (k, &i) in embedding_indices(self.cutoff, cutoff, self.nmodes).iter().enumerate() {
            amps[i] = self.amps[k];
        }
        FockState { amps, cutoff, nmodes: self.nmodes }
    }

    /// Components below a smaller cutoff (not renormalized).
    pub fn project(&self, cutoff: usize) -> FockState {
        assert!(cutoff <= self.cutoff);
        let idx = embedding_indices(cutoff, self.cutoff, self.nmodes);
        FockState { amps: idx.iter().map(|&i| self.amps[i]).collect(), cutoff, nmodes: self.nmodes }
    }

    pub fn tensor(&self, other: &FockState) -> Result<FockState> {
        if self.cutoff != other.cutoff && self.nmodes > 0 && other.nmodes > 0 {
            return Err(Error::Domain("tensor product needs equal cutoffs".into()));
        }
        let cutoff = if self.nmodes > 0 { self.cutoff } else { other.cutoff };
        let mut amps = Array1::zeros(self.amps.len() * other.amps.len());
        for (i, a) in self.amps.iter().enumerate() {
            for (j, b) in other.amps.iter().enumerate() {
                amps[i * other.amps.len() + j] = a * b;
            }
        }
        Ok(FockState { amps, cutoff, nmodes: self.nmodes + other.nmodes })
    }

    pub fn expectation(&self, op: &OperatorMatrix) -> Result<C64> {
        self.inner(&self.apply(op)?)
    }

    /// ⟨x⟩ and the symmetrized covariance of the canonical coordinates.
    pub fn moments(&self) -> Result<(Array1<f64>, Array2<f64>)> {
        let n = self.nmodes;
        let norm = self.norm_sqr();
        let xs: Vec<CanonicalPolynomial> = (0..2 * n).map(|k| CanonicalPolynomial::coordinate(k, n)).collect();
        let mut mean = Array1::zeros(2 * n);
        for k in 0..2 * n {
            mean[k] = self.expectation(&operator_matrix(&xs[k], self.cutoff)?)?.re / norm;
        }
        let mut cov = Array2::zeros((2 * n, 2 * n));
        for j in 0..2 * n {
            for k in j..2 * n {
                let prod = &xs[j] * &xs[k];
                let e = self.expectation(&operator_matrix(&prod, self.cutoff)?)? / norm;
                // symmetrized product: Re⟨x_j x_k⟩ for Hermitian x_j, x_k
                let v = e.re - mean[j] * mean[k];
                cov[[j, k]] = v;
                cov[[k, j]] = v;
            }
        }
        Ok((mean, cov))
    }

    pub fn mean_photon_number(&self, mode: usize) -> Result<f64> {
        let op = operator_matrix(&CanonicalPolynomial::number(mode, self.nmodes), self.cutoff)?;
        Ok(self.expectation(&op)?.re / self.norm_sqr())
    }

    pub fn to_json(&self) -> serde_json::Value {
        let rec = FockRecord {
            nmodes: self.nmodes,
            cutoff: self.cutoff,
            amplitudes: self.amps.iter().enumerate().filter(|(_, z)| z.norm() > 0.0).map(|(i, z)| (i, z.re, z.im)).collect(),
        };
        serde_json::to_value(rec).expect("plain numbers")
    }
}

/// |⟨s1|s2⟩|².
pub fn fidelity(s1: &FockState, s2: &FockState) -> Result<f64> {
    Ok(s1.inner(s2)?.norm_sqr())
}

/// Two-mode squeezed vacuum √(1−η²) Σ ηⁿ |n, n⟩.
pub fn tmsv(eta: f64, cutoff: usize) -> Result<FockState> {
    if !(0.0..1.0).contains(&eta) {
        return Err(Error::Domain(format!("η must lie in [0, 1), got {eta}")));
    }
    let mut amps = Array1::zeros(cutoff * cutoff);
    let c = (1.0 - eta * eta).sqrt();
    let mut w = c;
    for n in 0..cutoff {
        amps[n * cutoff + n] = C64::new(w, 0.0);
        w *= eta;
    }
    Ok(FockState { amps, cutoff, nmodes: 2 })
}

/// Equally weighted pure states standing in for a mixed state.
#[derive(Clone, Debug, Default)]
pub struct Ensemble {
    pub members: Vec<FockState>,
}

impl Ensemble {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Mean overlap with a pure target.
    pub fn fidelity_to(&self, target: &FockState) -> Result<f64> {
        let mut acc = 0.0;
        for m in &self.members {
            acc += fidelity(m, target)?;
        }
        Ok(acc / self.members.len() as f64)
    }
}
