use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use super::gate::{AffineSymplectic, GateSpec};
use super::poly::{CanonicalPolynomial, Monomial};
use crate::error::{Error, Result};
use crate::linalg::{affine_flow, log_orthosymplectic, log_spd, omega, polar};

/// Symmetric (Weyl-ordered) form of a Hermitian polynomial of degree ≤ 2:
/// H = ½ xᵀ M x + cᵀ x + c0 where products are symmetrized.
#[derive(Clone, Debug)]
pub struct QuadraticForm {
    pub m: Array2<f64>,
    pub c: Array1<f64>,
    pub c0: f64,
}

const HERMITIAN_TOL: f64 = 1e-12;

pub fn quadratic_form(h: &CanonicalPolynomial) -> Result<QuadraticForm> {
    let deg = h.degree().unwrap_or(0);
    if deg > 2 {
        return Err(Error::DegreeTooHigh(deg));
    }
    let n = h.nmodes();
    let mut m = Array2::<C64>::zeros((2 * n, 2 * n));
    let mut c = Array1::<C64>::zeros(2 * n);
    let mut c0 = C64::default();
    for (mono, &v) in h.terms() {
        let idx: Vec<usize> =
            mono.exponents().iter().enumerate().flat_map(|(j, &e)| std::iter::repeat_n(j, e as usize)).collect();
        match idx.as_slice() {
            [] => c0 += v,
            [j] => c[*j] += v,
            [j, k] if j == k => m[[*j, *j]] += v * 2.0,
            [j, k] => {
                m[[*j, *k]] += v;
                m[[*k, *j]] += v;
                if *k == *j + 1 && j % 2 == 0 {
                    // q p = (qp + pq)/2 + i/2
                    c0 += v * C64::new(0.0, 0.5);
                }
            }
            _ => unreachable!(),
        }
    }
    let scale = h.max_coeff().max(1.0);
    let defect = m.iter().chain(c.iter()).chain(std::iter::once(&c0)).fold(0.0f64, |a, z| a.max(z.im.abs()));
    if defect > HERMITIAN_TOL * scale {
        return Err(Error::NotHermitian(defect));
    }
    Ok(QuadraticForm { m: m.mapv(|z| z.re), c: c.mapv(|z| z.re), c0: c0.re })
}

/// Normal-ordered polynomial for the Weyl form ½ xᵀ M x + cᵀ x + c0.
pub fn from_quadratic_form(q: &QuadraticForm) -> CanonicalPolynomial {
    let n = q.c.len() / 2;
    let mut p = CanonicalPolynomial::scalar(n, q.c0);
    for j in 0..2 * n {
        if q.c[j] != 0.0 {
            p = p + CanonicalPolynomial::coordinate(j, n).scale(q.c[j]);
        }
        if q.m[[j, j]] != 0.0 {
            let mut e = vec![0u32; 2 * n];
            e[j] = 2;
            p.add_term(Monomial::from_exponents(e), C64::from(q.m[[j, j]] / 2.0));
        }
        for k in j + 1..2 * n {
            let v = (q.m[[j, k]] + q.m[[k, j]]) / 2.0;
            if v != 0.0 {
                let mut e = vec![0u32; 2 * n];
                e[j] = 1;
                e[k] = 1;
                p.add_term(Monomial::from_exponents(e), C64::from(v));
                if k == j + 1 && j % 2 == 0 {
                    p.add_term(Monomial::identity(n), C64::new(0.0, -0.5 * v));
                }
            }
        }
    }
    p
}

/// Exact affine-symplectic form of a Gaussian gate.
///
/// For exp(iH) with H = ½xᵀMx + cᵀx + c0 the Heisenberg flow gives
/// U† x U = e^{−ΩM} x − φ(−ΩM) Ω c and phase c0.
pub fn clifford_decompose(g: &GateSpec) -> Result<AffineSymplectic> {
    match g {
        GateSpec::Affine(a) => Ok(a.clone()),
        GateSpec::Exponential { generator, strength } => {
            let qf = quadratic_form(generator)?;
            let w = omega(generator.nmodes());
            let a = -w.dot(&qf.m) * *strength;
            let b = -w.dot(&qf.c) * *strength;
            let (s, d) = affine_flow(&a, &b);
            Ok(AffineSymplectic { s, d, phase: qf.c0 * strength })
        }
        GateSpec::Sequence(gs) => {
            let n = g.nmodes();
            let mut acc = AffineSymplectic::identity(n);
            for h in gs {
                let a = clifford_decompose(&h.embed(n))?;
                acc = a.after(&acc);
            }
            Ok(acc)
        }
    }
}

/// Exponential factors realizing an affine map, in circuit order:
/// positive part of the polar decomposition, orthogonal part, then displacement with phase.
pub fn affine_generators(a: &AffineSymplectic) -> Result<Vec<GateSpec>> {
    let n = a.nmodes();
    let w = omega(n);
    let (o, p) = polar(&a.s)?;
    let mut out = Vec::new();
    // e^{−ΩM} = X  ⇒  M = Ω log X
    for log in [log_spd(&p)?, log_orthosymplectic(&o)?] {
        let mut m = w.dot(&log);
        m = (&m + &m.t()) * 0.5;
        if m.iter().any(|v| v.abs() > 1e-15) {
            let qf = QuadraticForm { m, c: Array1::zeros(2 * n), c0: 0.0 };
            out.push(GateSpec::exponential(from_quadratic_form(&qf), 1.0));
        }
    }
    let mut disp = CanonicalPolynomial::scalar(n, a.phase);
    for j in 0..n {
        disp = disp + super::gate::pauli_exponent(j, n, a.d[2 * j], a.d[2 * j + 1]);
    }
    if !disp.is_zero() {
        out.push(GateSpec::exponential(disp, 1.0));
    }
    Ok(out)
}
