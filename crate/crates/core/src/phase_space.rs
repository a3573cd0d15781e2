//! Gaussian states: means and covariances under affine-symplectic gates, homodyne
//! measurement and additive Gaussian noise.

use ndarray::{s, Array1, Array2};
use ndarray_linalg::{Determinant, Eigh, Inverse, UPLO};
use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::algebra::{clifford_decompose, AffineSymplectic, GateSpec};
use crate::error::{Error, Result};
use crate::linalg::omega;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quadrature {
    Q,
    P,
}

impl Quadrature {
    pub fn offset(self) -> usize {
        match self {
            Quadrature::Q => 0,
            Quadrature::P => 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GaussianState {
    mean: Array1<f64>,
    cov: Array2<f64>,
}

#[derive(Serialize)]
struct GaussianRecord<'a> {
    nmodes: usize,
    mean: &'a [f64],
    cov: Vec<Vec<f64>>,
}

const SYM_TOL: f64 = 1e-12;
const UNCERTAINTY_TOL: f64 = -1e-10;

impl GaussianState {
    pub fn new(mean: Array1<f64>, cov: Array2<f64>) -> Result<Self> {
        let dim = mean.len();
        if !dim.is_multiple_of(2) || cov.dim() != (dim, dim) {
            return Err(Error::Domain("mean must have length 2n and cov shape 2n×2n".into()));
        }
        let asym = (&cov - &cov.t()).iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if asym > SYM_TOL {
            return Err(Error::Domain(format!("covariance not symmetric ({asym:e})")));
        }
        let st = GaussianState { mean, cov };
        let lam = st.uncertainty_min_eigenvalue();
        if lam < UNCERTAINTY_TOL {
            return Err(Error::Domain(format!("covariance violates the uncertainty relation ({lam:e})")));
        }
        Ok(st)
    }

    pub fn vacuum(nmodes: usize) -> Self {
        GaussianState { mean: Array1::zeros(2 * nmodes), cov: Array2::eye(2 * nmodes) * 0.5 }
    }

    pub fn coherent(q: f64, p: f64) -> Self {
        GaussianState { mean: Array1::from(vec![q, p]), cov: Array2::eye(2) * 0.5 }
    }

    /// Thermal state with mean photon number `nbar`.
    pub fn thermal(nbar: f64) -> Self {
        GaussianState { mean: Array1::zeros(2), cov: Array2::eye(2) * (nbar + 0.5) }
    }

    /// The zero-mode state left after measuring every mode.
    pub fn empty() -> Self {
        GaussianState { mean: Array1::zeros(0), cov: Array2::zeros((0, 0)) }
    }

    pub fn nmodes(&self) -> usize {
        self.mean.len() / 2
    }

    pub fn mean(&self) -> &Array1<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &Array2<f64> {
        &self.cov
    }

    /// Smallest eigenvalue of cov + iΩ/2.
    pub fn uncertainty_min_eigenvalue(&self) -> f64 {
        let n = self.nmodes();
        if n == 0 {
            return 0.0;
        }
        let w = omega(n);
        let h = Array2::from_shape_fn(self.cov.dim(), |(j, k)| C64::new(self.cov[[j, k]], 0.5 * w[[j, k]]));
        match h.eigh(UPLO::Upper) {
            Ok((vals, _)) => vals.iter().cloned().fold(f64::INFINITY, f64::min),
            Err(_) => f64::NAN,
        }
    }

    /// det(2·cov); 1 for pure states.
    pub fn purity_det(&self) -> f64 {
        if self.nmodes() == 0 {
            return 1.0;
        }
        (&self.cov * 2.0).det().unwrap_or(f64::NAN)
    }

    pub fn mean_photon_number(&self, mode: usize) -> f64 {
        let (q, p) = (2 * mode, 2 * mode + 1);
        (self.cov[[q, q]] + self.cov[[p, p]] + self.mean[q].powi(2) + self.mean[p].powi(2) - 1.0) / 2.0
    }

    /// Single-mode marginal.
    pub fn mode(&self, mode: usize) -> GaussianState {
        let r = 2 * mode..2 * mode + 2;
        GaussianState { mean: self.mean.slice(s![r.clone()]).to_owned(), cov: self.cov.slice(s![r.clone(), r]).to_owned() }
    }

    pub fn tensor(&self, other: &GaussianState) -> GaussianState {
        let (a, b) = (self.mean.len(), other.mean.len());
        let mut mean = Array1::zeros(a + b);
        mean.slice_mut(s![..a]).assign(&self.mean);
        mean.slice_mut(s![a..]).assign(&other.mean);
        let mut cov = Array2::zeros((a + b, a + b));
        cov.slice_mut(s![..a, ..a]).assign(&self.cov);
        cov.slice_mut(s![a.., a..]).assign(&other.cov);
        GaussianState { mean, cov }
    }

    fn symmetrized(mut self) -> Self {
        let t = self.cov.t().to_owned();
        self.cov = (&self.cov + &t) * 0.5;
        self
    }

    pub fn to_json(&self) -> serde_json::Value {
        let rec = GaussianRecord {
            nmodes: self.nmodes(),
            mean: self.mean.as_slice().unwrap_or(&[]),
            cov: self.cov.rows().into_iter().map(|r| r.to_vec()).collect(),
        };
        serde_json::to_value(rec).expect("plain numbers")
    }
}

/// mean → S·mean + d, cov → S·cov·Sᵀ for an affine map acting on the leading modes.
pub fn apply_affine(a: &AffineSymplectic, s: &GaussianState) -> Result<GaussianState> {
    if a.nmodes() > s.nmodes() {
        return Err(Error::ModeMismatch(a.nmodes(), s.nmodes()));
    }
    let a = a.embed(s.nmodes(), 0);
    let defect = crate::linalg::symplectic_defect(&a.s);
    if defect > crate::algebra::gate::SYMPLECTIC_TOL {
        return Err(Error::NotSymplectic(defect));
    }
    Ok(GaussianState { mean: a.s.dot(&s.mean) + &a.d, cov: a.s.dot(&s.cov).dot(&a.s.t()) }.symmetrized())
}

/// Apply a Gaussian gate (any degree-≤2 gate is reduced to its affine form first).
pub fn apply_gate(g: &GateSpec, s: &GaussianState) -> Result<GaussianState> {
    apply_affine(&clifford_decompose(g)?, s)
}

/// Two-mode squeezed vacuum with squeezing r.
pub fn epr_pair(r: f64) -> GaussianState {
    let (c, sh) = ((2.0 * r).cosh() / 2.0, (2.0 * r).sinh() / 2.0);
    let mut cov = Array2::zeros((4, 4));
    for j in 0..4 {
        cov[[j, j]] = c;
    }
    cov[[0, 2]] = sh;
    cov[[2, 0]] = sh;
    cov[[1, 3]] = -sh;
    cov[[3, 1]] = -sh;
    GaussianState { mean: Array1::zeros(4), cov }
}

/// Mean and variance of one quadrature.
pub fn homodyne_marginal(s: &GaussianState, mode: usize, quad: Quadrature) -> (f64, f64) {
    let k = 2 * mode + quad.offset();
    (s.mean[k], s.cov[[k, k]])
}

/// State of the other modes given outcome `x`; the measured mode is removed.
pub fn homodyne_condition(s: &GaussianState, mode: usize, quad: Quadrature, x: f64) -> Result<GaussianState> {
    let n = s.nmodes();
    if mode >= n {
        return Err(Error::Domain(format!("mode {mode} out of range for {n} modes")));
    }
    let k = 2 * mode + quad.offset();
    let keep: Vec<usize> = (0..2 * n).filter(|&j| j / 2 != mode).collect();
    let vkk = s.cov[[k, k]];
    let m = keep.len();
    let mut mean = Array1::zeros(m);
    let mut cov = Array2::zeros((m, m));
    for (a, &ja) in keep.iter().enumerate() {
        mean[a] = s.mean[ja];
        for (b, &jb) in keep.iter().enumerate() {
            cov[[a, b]] = s.cov[[ja, jb]];
        }
    }
    if vkk > 1e-300 {
        for (a, &ja) in keep.iter().enumerate() {
            mean[a] += s.cov[[ja, k]] * (x - s.mean[k]) / vkk;
            for (b, &jb) in keep.iter().enumerate() {
                cov[[a, b]] -= s.cov[[ja, k]] * s.cov[[k, jb]] / vkk;
            }
        }
    }
    Ok(GaussianState { mean, cov }.symmetrized())
}

/// Sample a homodyne outcome and condition the remaining modes.
pub fn homodyne_measure<R: Rng + ?Sized>(
    s: &GaussianState,
    mode: usize,
    quad: Quadrature,
    rng: &mut R,
) -> Result<(f64, GaussianState)> {
    if mode >= s.nmodes() {
        return Err(Error::Domain(format!("mode {mode} out of range for {} modes", s.nmodes())));
    }
    let (mu, var) = homodyne_marginal(s, mode, quad);
    let x = if var > 1e-300 {
        let z: f64 = rng.sample(StandardNormal);
        mu + var.sqrt() * z
    } else {
        mu
    };
    Ok((x, homodyne_condition(s, mode, quad, x)?))
}

/// cov += (σ/2)·I on the chosen modes.
pub fn add_gaussian_noise(s: &GaussianState, sigma: f64, modes: &[usize]) -> Result<GaussianState> {
    if !(sigma >= 0.0) {
        return Err(Error::Domain(format!("noise strength must be non-negative, got {sigma}")));
    }
    let mut out = s.clone();
    for &m in modes {
        if m >= s.nmodes() {
            return Err(Error::Domain(format!("mode {m} out of range")));
        }
        out.cov[[2 * m, 2 * m]] += sigma / 2.0;
        out.cov[[2 * m + 1, 2 * m + 1]] += sigma / 2.0;
    }
    Ok(out)
}

/// Fidelity between single-mode Gaussian states.
pub fn fidelity_gaussian(s1: &GaussianState, s2: &GaussianState) -> Result<f64> {
    if s1.nmodes() != 1 || s2.nmodes() != 1 {
        return Err(Error::Domain("closed-form Gaussian fidelity is single-mode only".into()));
    }
    let sum = &s1.cov + &s2.cov;
    let d = &s1.mean - &s2.mean;
    let big = 4.0 * sum.det()?;
    let small = ((4.0 * s1.cov.det()? - 1.0) * (4.0 * s2.cov.det()? - 1.0)).max(0.0);
    let expo = -0.5 * d.dot(&sum.inv()?.dot(&d));
    Ok((2.0 / ((big + small).sqrt() - small.sqrt()) * expo.exp()).min(1.0))
}
