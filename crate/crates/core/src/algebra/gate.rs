use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use super::poly::CanonicalPolynomial;
use crate::error::{Error, Result};
use crate::linalg::{symplectic_defect, symplectic_inverse};

pub const SYMPLECTIC_TOL: f64 = 1e-10;

/// Gaussian unitary U acting as U† x U = S x + d, with a tracked global phase.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineSymplectic {
    pub s: Array2<f64>,
    pub d: Array1<f64>,
    pub phase: f64,
}

impl AffineSymplectic {
    pub fn new(s: Array2<f64>, d: Array1<f64>, phase: f64) -> Result<Self> {
        if s.nrows() != s.ncols() || !s.nrows().is_multiple_of(2) || s.nrows() == 0 || d.len() != s.nrows() {
            return Err(Error::Domain("affine map needs a 2n×2n matrix and a 2n vector".into()));
        }
        let defect = symplectic_defect(&s);
        if !(defect <= SYMPLECTIC_TOL) {
            return Err(Error::NotSymplectic(defect));
        }
        Ok(AffineSymplectic { s, d, phase })
    }

    pub fn identity(nmodes: usize) -> Self {
        AffineSymplectic { s: Array2::eye(2 * nmodes), d: Array1::zeros(2 * nmodes), phase: 0.0 }
    }

    pub fn displacement(q0: f64, p0: f64) -> Self {
        AffineSymplectic { s: Array2::eye(2), d: Array1::from(vec![q0, p0]), phase: 0.0 }
    }

    pub fn nmodes(&self) -> usize {
        self.s.nrows() / 2
    }

    /// `self` applied after `first` (circuit order: first, then self).
    pub fn after(&self, first: &AffineSymplectic) -> AffineSymplectic {
        AffineSymplectic { s: self.s.dot(&first.s), d: self.s.dot(&first.d) + &self.d, phase: self.phase + first.phase }
    }

    pub fn inverse(&self) -> AffineSymplectic {
        let si = symplectic_inverse(&self.s);
        let d = -si.dot(&self.d);
        AffineSymplectic { s: si, d, phase: -self.phase }
    }

    /// Act on modes `offset..offset+k` of a `total`-mode system.
    pub fn embed(&self, total: usize, offset: usize) -> AffineSymplectic {
        let k = self.nmodes();
        assert!(offset + k <= total);
        let mut s = Array2::eye(2 * total);
        let mut d = Array1::zeros(2 * total);
        for a in 0..2 * k {
            d[2 * offset + a] = self.d[a];
            for b in 0..2 * k {
                s[[2 * offset + a, 2 * offset + b]] = self.s[[a, b]];
            }
        }
        AffineSymplectic { s, d, phase: self.phase }
    }

    /// Largest deviation of (S, d) from the identity map.
    pub fn distance_from_identity(&self) -> f64 {
        let ds = (&self.s - &Array2::<f64>::eye(self.s.nrows())).iter().fold(0.0f64, |m, x| m.max(x.abs()));
        self.d.iter().fold(ds, |m, x| m.max(x.abs()))
    }

    /// Images U x_j U† = S⁻¹(x − d) of the canonical coordinates.
    pub fn conjugation_images(&self) -> Vec<CanonicalPolynomial> {
        let inv = self.inverse();
        affine_images(&inv.s, &inv.d)
    }

    /// Images U† x_j U = S x + d.
    pub fn pullback_images(&self) -> Vec<CanonicalPolynomial> {
        affine_images(&self.s, &self.d)
    }
}

pub(crate) fn affine_images(s: &Array2<f64>, d: &Array1<f64>) -> Vec<CanonicalPolynomial> {
    let n = s.nrows() / 2;
    (0..2 * n)
        .map(|j| {
            let mut img = CanonicalPolynomial::scalar(n, d[j]);
            for k in 0..2 * n {
                if s[[j, k]] != 0.0 {
                    img = img + CanonicalPolynomial::coordinate(k, n).scale(s[[j, k]]);
                }
            }
            img
        })
        .collect()
}

/// A unitary gate.
#[derive(Clone, Debug, PartialEq)]
pub enum GateSpec {
    Affine(AffineSymplectic),
    /// exp(i·strength·generator)
    Exponential {
        generator: CanonicalPolynomial,
        strength: f64,
    },
    /// Circuit time order: the first element acts first.
    Sequence(Vec<GateSpec>),
}

impl GateSpec {
    pub fn exponential(generator: CanonicalPolynomial, strength: f64) -> Self {
        GateSpec::Exponential { generator, strength }
    }

    pub fn identity(nmodes: usize) -> Self {
        GateSpec::Affine(AffineSymplectic::identity(nmodes))
    }

    /// R(q0, p0) = exp(−i(q0 p − p0 q)) on one mode.
    pub fn displacement(q0: f64, p0: f64) -> Self {
        Self::displacement_on(0, 1, q0, p0)
    }

    pub fn displacement_on(mode: usize, nmodes: usize, q0: f64, p0: f64) -> Self {
        Self::exponential(pauli_exponent(mode, nmodes, q0, p0), 1.0)
    }

    /// V(γ) = exp(iγ q³).
    pub fn cubic(gamma: f64) -> Self {
        Self::exponential(CanonicalPolynomial::mode_monomial(0, 1, 3, 0, 1.0), gamma)
    }

    /// exp(i r (qp + pq)/2): contracts q by e^{−r}.
    pub fn squeezer(r: f64) -> Self {
        let qp = CanonicalPolynomial::mode_monomial(0, 1, 1, 1, 1.0);
        let gen = qp - CanonicalPolynomial::scalar(1, C64::new(0.0, 0.5));
        Self::exponential(gen, r)
    }

    /// exp(iθ(q² + p²)/2): counter-clockwise phase-space rotation by θ.
    pub fn rotation(theta: f64) -> Self {
        let gen = CanonicalPolynomial::mode_monomial(0, 1, 2, 0, 0.5) + CanonicalPolynomial::mode_monomial(0, 1, 0, 2, 0.5);
        Self::exponential(gen, theta)
    }

    /// exp(i s q_i q_j² / 2).
    pub fn controlled_phase(s: f64, i: usize, j: usize, nmodes: usize) -> Self {
        assert!(i != j && i < nmodes && j < nmodes);
        let gen =
            CanonicalPolynomial::q(i, nmodes).multiply(&CanonicalPolynomial::q(j, nmodes).pow(2)).expect("same modes").scale(0.5);
        Self::exponential(gen, s)
    }

    /// exp(iκ n²).
    pub fn kerr(kappa: f64) -> Self {
        Self::exponential(CanonicalPolynomial::number(0, 1).pow(2), kappa)
    }

    /// Real beamsplitter mixing modes i and j by angle θ (θ = π/4 is 50:50).
    pub fn beamsplitter(theta: f64, i: usize, j: usize, nmodes: usize) -> Self {
        assert!(i != j && i < nmodes && j < nmodes);
        let (c, s) = (theta.cos(), theta.sin());
        let mut m = Array2::eye(2 * nmodes);
        for x in 0..2 {
            m[[2 * i + x, 2 * i + x]] = c;
            m[[2 * i + x, 2 * j + x]] = -s;
            m[[2 * j + x, 2 * i + x]] = s;
            m[[2 * j + x, 2 * j + x]] = c;
        }
        GateSpec::Affine(AffineSymplectic { s: m, d: Array1::zeros(2 * nmodes), phase: 0.0 })
    }

    pub fn nmodes(&self) -> usize {
        match self {
            GateSpec::Affine(a) => a.nmodes(),
            GateSpec::Exponential { generator, .. } => generator.nmodes(),
            GateSpec::Sequence(gs) => gs.iter().map(GateSpec::nmodes).max().unwrap_or(1),
        }
    }

    /// The same gate on a system with `nmodes` modes (acting on the leading ones).
    pub fn embed(&self, nmodes: usize) -> GateSpec {
        match self {
            GateSpec::Affine(a) => GateSpec::Affine(a.embed(nmodes, 0)),
            GateSpec::Exponential { generator, strength } => {
                GateSpec::Exponential { generator: generator.embed(nmodes), strength: *strength }
            }
            GateSpec::Sequence(gs) => GateSpec::Sequence(gs.iter().map(|g| g.embed(nmodes)).collect()),
        }
    }

    /// Inverse gate.
    pub fn inverse(&self) -> GateSpec {
        match self {
            GateSpec::Affine(a) => GateSpec::Affine(a.inverse()),
            GateSpec::Exponential { generator, strength } => {
                GateSpec::Exponential { generator: generator.clone(), strength: -strength }
            }
            GateSpec::Sequence(gs) => GateSpec::Sequence(gs.iter().rev().map(GateSpec::inverse).collect()),
        }
    }

    /// Largest generator degree; affine gates count as 2.
    pub fn max_degree(&self) -> u32 {
        match self {
            GateSpec::Affine(_) => 2,
            GateSpec::Exponential { generator, .. } => generator.degree().unwrap_or(0),
            GateSpec::Sequence(gs) => gs.iter().map(GateSpec::max_degree).max().unwrap_or(0),
        }
    }
}

/// −(q0 p − p0 q) on one mode of an n-mode system.
pub fn pauli_exponent(mode: usize, nmodes: usize, q0: f64, p0: f64) -> CanonicalPolynomial {
    CanonicalPolynomial::q(mode, nmodes).scale(p0) - CanonicalPolynomial::p(mode, nmodes).scale(q0)
}
