//! Single-mode states stored as F|φ⟩: a Gaussian frame F (an affine-symplectic unitary)
//! acting on a truncated vector φ. Gaussian gates only update F, so large displacements
//! and squeezing never strain the cutoff.

use std::cell::RefCell;
use std::collections::HashMap;
use std::rc::Rc;

use ndarray::{s, Array1, Array2};
use num_complex::Complex64 as C64;

use super::matrix::{exp_hermitian, gate_matrix_full, operator_matrix, Convergence, ExpMethod};
use super::state::FockState;
use crate::algebra::{clifford_decompose, AffineSymplectic, CanonicalPolynomial, GateSpec};
use crate::error::{Error, Result};

/// Numerical policy for operations on the vector part.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VectorPolicy {
    /// First working cutoff is cutoff + pad.
    pub pad: usize,
    /// Results are accepted once growing the working cutoff changes them by less than this.
    pub tol: f64,
    pub max_cutoff: usize,
    pub method: ExpMethod,
}

impl Default for VectorPolicy {
    fn default() -> Self {
        VectorPolicy { pad: 8, tol: 1e-10, max_cutoff: 400, method: ExpMethod::Eigh }
    }
}

const FRAME_IDENTITY_TOL: f64 = 1e-12;

type UnitaryKey = (String, u64, usize, ExpMethod);

thread_local! {
    // Trial loops apply the same non-Gaussian gate over and over; keep its working matrices.
    static UNITARIES: RefCell<HashMap<UnitaryKey, Rc<Array2<C64>>>> = RefCell::new(HashMap::new());
}
const UNITARY_CACHE_LEN: usize = 16;

fn unitary(h: &CanonicalPolynomial, t: f64, w: usize, method: ExpMethod) -> Result<Rc<Array2<C64>>> {
    let key = (h.to_string(), t.to_bits(), w, method);
    if let Some(u) = UNITARIES.with(|c| c.borrow().get(&key).cloned()) {
        return Ok(u);
    }
    let hm = operator_matrix(h, w)?;
    let u = Rc::new(exp_hermitian(&hm.matrix, C64::new(0.0, t), method)?);
    UNITARIES.with(|c| {
        let mut c = c.borrow_mut();
        if c.len() >= UNITARY_CACHE_LEN {
            c.clear();
        }
        c.insert(key, u.clone());
    });
    Ok(u)
}

#[derive(Clone, Debug)]
pub struct FramedState {
    pub frame: AffineSymplectic,
    pub vector: FockState,
    pub policy: VectorPolicy,
    /// Largest change seen across working-cutoff refinements.
    pub truncation_change: f64,
    pub converged: bool,
}

impl FramedState {
    pub fn new(vector: FockState, policy: VectorPolicy) -> Result<Self> {
        if vector.nmodes() != 1 {
            return Err(Error::Domain("framed states are single-mode".into()));
        }
        Ok(FramedState { frame: AffineSymplectic::identity(1), vector, policy, truncation_change: 0.0, converged: true })
    }

    pub fn cutoff(&self) -> usize {
        self.vector.cutoff()
    }

    /// Apply a Gaussian unitary after the current state.
    pub fn apply_affine(&mut self, a: &AffineSymplectic) {
        self.frame = a.after(&self.frame);
    }

    pub fn apply_gate(&mut self, g: &GateSpec) -> Result<()> {
        if g.nmodes() != 1 {
            return Err(Error::ModeMismatch(g.nmodes(), 1));
        }
        match g {
            GateSpec::Affine(a) => self.apply_affine(a),
            GateSpec::Sequence(gs) => {
                for h in gs {
                    self.apply_gate(h)?;
                }
            }
            GateSpec::Exponential { generator, strength } => {
                if generator.degree().unwrap_or(0) <= 2 {
                    let a = clifford_decompose(g)?;
                    self.apply_affine(&a);
                } else {
                    self.apply_nongaussian(generator, *strength)?;
                }
            }
        }
        Ok(())
    }

    /// The generator as seen by the vector: F† H F.
    pub fn pulled_back(&self, h: &CanonicalPolynomial) -> Result<CanonicalPolynomial> {
        h.substitute(&self.frame.pullback_images())
    }

    fn apply_nongaussian(&mut self, h: &CanonicalPolynomial, t: f64) -> Result<()> {
        let hf = self.pulled_back(h)?;
        let high = hf.degree_range(3, u32::MAX);
        let low = hf.degree_range(0, 2);
        let comm = high.commutator(&low)?;
        let scale = hf.max_coeff().max(1.0);
        if comm.chop(1e-13 * scale * scale).is_zero() {
            // exp(it(high + low)) = exp(it low) exp(it high): the Gaussian factor joins the frame
            self.apply_vector_exponential(&high, C64::new(0.0, t))?;
            if !low.is_zero() {
                let c = clifford_decompose(&GateSpec::exponential(low, t))?;
                self.frame = self.frame.after(&c);
            }
        } else {
            self.apply_vector_exponential(&hf, C64::new(0.0, t))?;
        }
        Ok(())
    }

    /// φ ← exp(s·H) φ for Hermitian H given in the vector's own frame, computed on a
    /// converged working cutoff and projected back.
    pub fn apply_vector_exponential(&mut self, h: &CanonicalPolynomial, s: C64) -> Result<()> {
        let n = self.cutoff();
        let p = self.policy;
        let vec = self.vector.clone();
        let (out, conv) = converge_vector(n, p, |w| {
            if s.re == 0.0 {
                return Ok(unitary(h, s.im, w, p.method)?.dot(vec.embed(w).amplitudes()));
            }
            let hm = operator_matrix(h, w)?;
            let u = exp_hermitian(&hm.matrix, s, p.method)?;
            Ok(u.dot(vec.embed(w).amplitudes()))
        })?;
        self.vector = FockState::from_amplitudes(out, n, 1)?;
        self.record(conv);
        Ok(())
    }

    fn record(&mut self, c: Convergence) {
        self.truncation_change = self.truncation_change.max(c.change);
        self.converged &= c.converged;
    }

    /// φ ← exp(s·(F† H F)) φ / ‖·‖ for a non-unitary filter such as η^n; the scalar part
    /// of the generator only affects normalization and is dropped.
    pub fn apply_filter(&mut self, h: &CanonicalPolynomial, s: f64) -> Result<()> {
        let hf = self.pulled_back(h)?;
        let hf = hf.try_sub(&CanonicalPolynomial::scalar(1, hf.scalar_part()))?;
        self.apply_vector_exponential(&hf, C64::new(s, 0.0))?;
        self.vector = self.vector.normalized()?;
        Ok(())
    }

    /// Replace by the given vector with an identity frame.
    pub fn reset(&mut self, vector: FockState) {
        self.frame = AffineSymplectic::identity(1);
        self.vector = vector;
    }

    /// Plain vector on the retained cutoff.
    pub fn materialize(&self) -> Result<FockState> {
        let mut copy = self.clone();
        let f = self.frame.clone();
        copy.apply_frame_to_vector(&f)?;
        Ok(copy.vector)
    }

    fn apply_frame_to_vector(&mut self, a: &AffineSymplectic) -> Result<()> {
        if a.distance_from_identity() < FRAME_IDENTITY_TOL {
            self.vector = self.vector.scaled(C64::from_polar(1.0, a.phase));
            return Ok(());
        }
        let n = self.cutoff();
        let p = self.policy;
        let vec = self.vector.clone();
        let g = GateSpec::Affine(a.clone());
        let (out, conv) = converge_vector(n, p, |w| Ok(gate_matrix_full(&g, w, 1, p.method)?.dot(vec.embed(w).amplitudes())))?;
        self.vector = FockState::from_amplitudes(out, n, 1)?;
        self.record(conv);
        Ok(())
    }

    /// |⟨self|other⟩|², evaluated in the frame of `self`.
    pub fn fidelity(&self, other: &FramedState) -> Result<f64> {
        let rel = self.frame.inverse().after(&other.frame);
        let mut o = other.clone();
        o.frame = AffineSymplectic::identity(1);
        o.apply_frame_to_vector(&rel)?;
        let a = self.vector.normalized()?;
        let b = o.vector.normalized()?;
        Ok(a.inner(&b)?.norm_sqr())
    }

    /// Fidelity with a plain vector.
    pub fn fidelity_to(&self, target: &FockState) -> Result<f64> {
        let t = FramedState::new(target.clone(), self.policy)?;
        t.fidelity(self)
    }

    /// ⟨x⟩ = S⟨x⟩_φ + d, cov = S cov_φ Sᵀ.
    pub fn moments(&self) -> Result<(Array1<f64>, Array2<f64>)> {
        let (m, c) = self.vector.normalized()?.moments()?;
        let s = &self.frame.s;
        Ok((s.dot(&m) + &self.frame.d, s.dot(&c).dot(&s.t())))
    }
}

/// Apply `build(M)` for growing working cutoffs M until the retained components settle.
fn converge_vector<F>(cutoff: usize, p: VectorPolicy, mut build: F) -> Result<(Array1<C64>, Convergence)>
where
    F: FnMut(usize) -> Result<Array1<C64>>,
{
    let mut work = (cutoff + p.pad).max(cutoff + 2);
    let mut prev = build(work)?.slice(s![..cutoff]).to_owned();
    let mut change = f64::INFINITY;
    loop {
        let next = (work + (work / 4).max(8)).min(p.max_cutoff);
        if next <= work {
            return Ok((prev, Convergence { working_cutoff: work, change, converged: false }));
        }
        let cur = build(next)?.slice(s![..cutoff]).to_owned();
        change = (&cur - &prev).iter().fold(0.0f64, |m, z| m.max(z.norm()));
        work = next;
        if change < p.tol {
            return Ok((cur, Convergence { working_cutoff: work, change, converged: true }));
        }
        prev = cur;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::matrix::{gate_matrix_converged, ExpMethod};

    #[test]
    fn gaussian_gates_only_touch_frame() {
        let mut s = FramedState::new(FockState::vacuum(20, 1), VectorPolicy::default()).unwrap();
        s.apply_gate(&GateSpec::displacement(30.0, -40.0)).unwrap();
        s.apply_gate(&GateSpec::squeezer(1.5)).unwrap();
        assert_eq!(s.vector, FockState::vacuum(20, 1));
        let (m, _) = s.moments().unwrap();
        assert!((m[0] - 30.0 * (-1.5f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn cubic_on_displaced_state_matches_dense() {
        let n = 30;
        let mut s = FramedState::new(FockState::vacuum(n, 1), VectorPolicy::default()).unwrap();
        s.apply_gate(&GateSpec::displacement(0.6, 0.3)).unwrap();
        s.apply_gate(&GateSpec::cubic(0.05)).unwrap();
        let seq = GateSpec::Sequence(vec![GateSpec::displacement(0.6, 0.3), GateSpec::cubic(0.05)]);
        let (u, _) = gate_matrix_converged(&seq, n, 1e-11, 300, ExpMethod::Eigh).unwrap();
        let dense = FockState::vacuum(n, 1).apply(&u).unwrap();
        let f = s.fidelity_to(&dense).unwrap();
        assert!((f - 1.0).abs() < 1e-9, "{f}");
    }

    #[test]
    fn filter_of_number_operator() {
        // η^n on a coherent state gives the coherent state of amplitude ηα
        let n = 40;
        let eta: f64 = 0.6;
        let mut s = FramedState::new(FockState::coherent(1.0, 0.5, n), VectorPolicy::default()).unwrap();
        s.apply_filter(&CanonicalPolynomial::number(0, 1), eta.ln()).unwrap();
        let want = FockState::coherent(eta, 0.5 * eta, n);
        assert!((s.fidelity_to(&want).unwrap() - 1.0).abs() < 1e-10);
    }
}
