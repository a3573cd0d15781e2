use num_complex::Complex64 as C64;

use super::decompose::clifford_decompose;
use super::gate::{pauli_exponent, GateSpec};
use super::poly::CanonicalPolynomial;
use crate::error::{Error, Result};

pub const DEFAULT_MAX_DEPTH: usize = 16;

/// U X U⁻¹ as an exact polynomial.
///
/// Gaussian pieces use the closed-form affine substitution; higher-degree exponentials
/// sum the adjoint series, which must terminate within `max_depth` terms.
pub fn heisenberg_evolve(gate: &GateSpec, x: &CanonicalPolynomial, max_depth: usize) -> Result<CanonicalPolynomial> {
    let n = gate.nmodes().max(x.nmodes());
    let x = x.embed(n);
    match gate {
        GateSpec::Affine(a) => x.substitute(&a.embed(n, 0).conjugation_images()),
        GateSpec::Exponential { generator, strength } => {
            if generator.degree().unwrap_or(0) <= 2 {
                let a = clifford_decompose(gate)?.embed(n, 0);
                return x.substitute(&a.conjugation_images());
            }
            let h = generator.embed(n);
            let mut sum = x.clone();
            let mut term = x;
            for k in 1..=max_depth {
                term = h.commutator(&term)?.scale(C64::new(0.0, *strength / k as f64));
                if term.is_zero() {
                    return Ok(sum);
                }
                sum = sum + term.clone();
            }
            Err(Error::NonTerminatingAdjoint(max_depth))
        }
        GateSpec::Sequence(gs) => gs.iter().try_fold(x, |acc, g| heisenberg_evolve(&g.embed(n), &acc, max_depth)),
    }
}

/// U R(q0, p0) U⁻¹ on `mode`, as a single exponential.
pub fn conjugate_pauli_on(gate: &GateSpec, mode: usize, q0: f64, p0: f64) -> Result<GateSpec> {
    let n = gate.nmodes().max(mode + 1);
    let hq = heisenberg_evolve(gate, &CanonicalPolynomial::q(mode, n), DEFAULT_MAX_DEPTH)?;
    let hp = heisenberg_evolve(gate, &CanonicalPolynomial::p(mode, n), DEFAULT_MAX_DEPTH)?;
    let exponent = hq.scale(p0) - hp.scale(q0);
    Ok(GateSpec::exponential(exponent, 1.0))
}

/// U R(q0, p0) U⁻¹ for the Pauli displacement on mode 0.
pub fn conjugate_pauli(gate: &GateSpec, q0: f64, p0: f64) -> Result<GateSpec> {
    conjugate_pauli_on(gate, 0, q0, p0)
}

/// Exponent of the cubic-phase correction U R(q0,p0) U⁻¹ for U = exp(iγq³).
pub fn cubic_correction_exponent(gamma: f64, q0: f64, p0: f64) -> CanonicalPolynomial {
    pauli_exponent(0, 1, q0, p0) + CanonicalPolynomial::mode_monomial(0, 1, 2, 0, 3.0 * gamma * q0)
}
