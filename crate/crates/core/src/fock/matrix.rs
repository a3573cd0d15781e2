use std::collections::HashMap;

use ndarray::{s, Array2};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::algebra::{affine_generators, format_gate, CanonicalPolynomial, GateSpec};
use crate::error::{Error, Result};
use crate::linalg::{eigh_hermitian, expm};

/// Dense matrix of an operator on the truncated number basis of `nmodes` modes.
/// Basis index is Σ n_i N^(m−1−i) (mode 0 most significant).
#[derive(Clone, Debug)]
pub struct OperatorMatrix {
    pub matrix: Array2<C64>,
    pub cutoff: usize,
    pub nmodes: usize,
    pub label: String,
}

impl OperatorMatrix {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Restrict to a smaller per-mode cutoff.
    pub fn project(&self, cutoff: usize) -> OperatorMatrix {
        OperatorMatrix {
            matrix: project(&self.matrix, self.cutoff, cutoff, self.nmodes),
            cutoff,
            nmodes: self.nmodes,
            label: self.label.clone(),
        }
    }

    pub fn dot(&self, other: &OperatorMatrix) -> OperatorMatrix {
        OperatorMatrix {
            matrix: self.matrix.dot(&other.matrix),
            cutoff: self.cutoff,
            nmodes: self.nmodes,
            label: format!("{}·{}", self.label, other.label),
        }
    }

    pub fn adjoint(&self) -> OperatorMatrix {
        OperatorMatrix {
            matrix: dagger(&self.matrix),
            cutoff: self.cutoff,
            nmodes: self.nmodes,
            label: format!("({})†", self.label),
        }
    }
}

pub fn dagger(m: &Array2<C64>) -> Array2<C64> {
    m.t().mapv(|z| z.conj())
}

/// Positions of the cutoff-`small` basis inside the cutoff-`big` basis.
pub fn embedding_indices(small: usize, big: usize, nmodes: usize) -> Vec<usize> {
    let mut idx = vec![0usize];
    for _ in 0..nmodes {
        idx = idx.iter().flat_map(|&i| (0..small).map(move |n| i * big + n)).collect();
    }
    idx
}

pub fn project(m: &Array2<C64>, from: usize, to: usize, nmodes: usize) -> Array2<C64> {
    if from == to {
        return m.clone();
    }
    if nmodes == 1 {
        return m.slice(s![..to, ..to]).to_owned();
    }
    let idx = embedding_indices(to, from, nmodes);
    Array2::from_shape_fn((idx.len(), idx.len()), |(a, b)| m[[idx[a], idx[b]]])
}

pub fn annihilation(cutoff: usize) -> Array2<C64> {
    let mut a = Array2::zeros((cutoff, cutoff));
    for n in 1..cutoff {
        a[[n - 1, n]] = C64::new((n as f64).sqrt(), 0.0);
    }
    a
}

/// Exact truncation of q^a p^b: built with enough headroom that no matrix product
/// loses a contribution, then cut back.
fn mode_monomial_matrix(a: u32, b: u32, cutoff: usize) -> Array2<C64> {
    let big = cutoff + (a + b) as usize;
    let ann = annihilation(big);
    let cre = dagger(&ann);
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let q = (&ann + &cre).mapv(|z| z * r);
    let p = (&cre - &ann).mapv(|z| z * C64::new(0.0, r));
    let mut m = Array2::<C64>::eye(big);
    for _ in 0..a {
        m = m.dot(&q);
    }
    for _ in 0..b {
        m = m.dot(&p);
    }
    m.slice(s![..cutoff, ..cutoff]).to_owned()
}

pub fn kron(a: &Array2<C64>, b: &Array2<C64>) -> Array2<C64> {
    let (ra, ca) = a.dim();
    let (rb, cb) = b.dim();
    let mut out = Array2::zeros((ra * rb, ca * cb));
    for i in 0..ra {
        for j in 0..ca {
            let v = a[[i, j]];
            if v == C64::default() {
                continue;
            }
            out.slice_mut(s![i * rb..(i + 1) * rb, j * cb..(j + 1) * cb]).assign(&b.mapv(|z| z * v));
        }
    }
    out
}

/// Matrix of a polynomial on the cutoff-N number basis.
pub fn operator_matrix(p: &CanonicalPolynomial, cutoff: usize) -> Result<OperatorMatrix> {
    if cutoff < 2 {
        return Err(Error::Domain(format!("cutoff must be at least 2, got {cutoff}")));
    }
    let m = p.nmodes();
    let dim = cutoff.pow(m as u32);
    let mut out = Array2::<C64>::zeros((dim, dim));
    let mut cache: HashMap<(u32, u32), Array2<C64>> = HashMap::new();
    for (mono, &c) in p.terms() {
        let mut acc: Option<Array2<C64>> = None;
        for i in 0..m {
            let (a, b) = mono.pair(i);
            let f = cache.entry((a, b)).or_insert_with(|| mode_monomial_matrix(a, b, cutoff)).clone();
            acc = Some(match acc {
                None => f,
                Some(x) => kron(&x, &f),
            });
        }
        out.scaled_add(c, &acc.expect("at least one mode"));
    }
    Ok(OperatorMatrix { matrix: out, cutoff, nmodes: m, label: p.to_string() })
}

/// How a unitary exp(itH) is evaluated from the Hermitian matrix H.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ExpMethod {
    /// Padé scaling and squaring.
    #[default]
    Pade,
    /// Hermitian eigendecomposition.
    Eigh,
}

/// Working-cutoff policy for truncated gates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Truncation {
    /// Extra levels per mode kept while exponentiating.
    pub pad: usize,
    pub method: ExpMethod,
}

impl Default for Truncation {
    fn default() -> Self {
        Truncation { pad: 8, method: ExpMethod::Pade }
    }
}

/// exp(s·H) for a Hermitian matrix H and complex s.
pub fn exp_hermitian(h: &Array2<C64>, s: C64, method: ExpMethod) -> Result<Array2<C64>> {
    match method {
        ExpMethod::Pade => Ok(expm(&h.mapv(|z| z * s))),
        ExpMethod::Eigh => {
            let (w, v) = eigh_hermitian(h)?;
            let mut vd = v.clone();
            for (j, mut col) in vd.columns_mut().into_iter().enumerate() {
                let f = (s * w[j]).exp();
                col.mapv_inplace(|z| z * f);
            }
            Ok(vd.dot(&dagger(&v)))
        }
    }
}

/// The gate on the working cutoff itself, without projection.
pub fn gate_matrix_full(g: &GateSpec, cutoff: usize, nmodes: usize, method: ExpMethod) -> Result<Array2<C64>> {
    match g {
        GateSpec::Exponential { generator, strength } => {
            let h = operator_matrix(&generator.embed(nmodes), cutoff)?;
            exp_hermitian(&h.matrix, C64::new(0.0, *strength), method)
        }
        GateSpec::Affine(a) => {
            let gens = affine_generators(&a.embed(nmodes, 0))?;
            gate_matrix_full(&GateSpec::Sequence(gens), cutoff, nmodes, method)
        }
        GateSpec::Sequence(gs) => {
            let dim = cutoff.pow(nmodes as u32);
            let mut acc = Array2::<C64>::eye(dim);
            for h in gs {
                acc = gate_matrix_full(h, cutoff, nmodes, method)?.dot(&acc);
            }
            Ok(acc)
        }
    }
}

/// Unitary of a gate on the cutoff-N basis, exponentiated at N + pad and projected.
pub fn gate_matrix(g: &GateSpec, cutoff: usize, trunc: Truncation) -> Result<OperatorMatrix> {
    if cutoff < 2 {
        return Err(Error::Domain(format!("cutoff must be at least 2, got {cutoff}")));
    }
    let n = g.nmodes();
    let work = cutoff + trunc.pad;
    let full = gate_matrix_full(g, work, n, trunc.method)?;
    Ok(OperatorMatrix { matrix: project(&full, work, cutoff, n), cutoff, nmodes: n, label: format_gate(g) })
}

/// Outcome of a working-cutoff convergence search.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Convergence {
    pub working_cutoff: usize,
    /// Largest element change of the retained block at the last step.
    pub change: f64,
    pub converged: bool,
}

/// Grow the working cutoff until the retained block of `build(M)` changes by less than `tol`.
pub fn converge<F>(
    cutoff: usize,
    nmodes: usize,
    tol: f64,
    start: usize,
    max_cutoff: usize,
    mut build: F,
) -> Result<(Array2<C64>, Convergence)>
where
    F: FnMut(usize) -> Result<Array2<C64>>,
{
    let mut work = start.max(cutoff + 2);
    let mut prev = project(&build(work)?, work, cutoff, nmodes);
    let mut change = f64::INFINITY;
    loop {
        let next = (work + (work / 4).max(8)).min(max_cutoff);
        if next <= work {
            return Ok((prev, Convergence { working_cutoff: work, change, converged: false }));
        }
        let cur = project(&build(next)?, next, cutoff, nmodes);
        change = (&cur - &prev).iter().fold(0.0f64, |m, z| m.max(z.norm()));
        work = next;
        if change < tol {
            return Ok((cur, Convergence { working_cutoff: work, change, converged: true }));
        }
        prev = cur;
    }
}

/// Gate matrix whose retained block is stable to `tol` under growth of the working cutoff.
pub fn gate_matrix_converged(
    g: &GateSpec,
    cutoff: usize,
    tol: f64,
    max_cutoff: usize,
    method: ExpMethod,
) -> Result<(OperatorMatrix, Convergence)> {
    let n = g.nmodes();
    let (m, c) = converge(cutoff, n, tol, cutoff + 8, max_cutoff, |w| gate_matrix_full(g, w, n, method))?;
    Ok((OperatorMatrix { matrix: m, cutoff, nmodes: n, label: format_gate(g) }, c))
}

fn ln_factorials(n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n + 1];
    for k in 1..=n {
        out[k] = out[k - 1] + (k as f64).ln();
    }
    out
}

/// Generalized Laguerre polynomials L_j^(k)(x) for j = 0..len.
fn laguerre(len: usize, k: f64, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(len);
    if len == 0 {
        return out;
    }
    out.push(1.0);
    if len > 1 {
        out.push(1.0 + k - x);
    }
    for j in 1..len.saturating_sub(1) {
        let jf = j as f64;
        let next = ((2.0 * jf + 1.0 + k - x) * out[j] - (jf + k) * out[j - 1]) / (jf + 1.0);
        out.push(next);
    }
    out
}

/// Matrix elements ⟨m|R(q0,p0)|n⟩ for m, n < N in closed form.
pub fn displacement_matrix(q0: f64, p0: f64, cutoff: usize) -> Array2<C64> {
    let alpha = C64::new(q0, p0) * std::f64::consts::FRAC_1_SQRT_2;
    let x = alpha.norm_sqr();
    let mut out = Array2::zeros((cutoff, cutoff));
    if x == 0.0 {
        return Array2::eye(cutoff);
    }
    let lf = ln_factorials(cutoff);
    let (r, th) = (alpha.norm(), alpha.arg());
    let damp = -x / 2.0;
    for d in 0..cutoff {
        let lag = laguerre(cutoff - d, d as f64, x);
        for (n, l) in lag.iter().enumerate() {
            let m = n + d;
            let mag = (0.5 * (lf[n] - lf[m]) + damp + d as f64 * r.ln()).exp() * l;
            // m ≥ n: α^{d}; m < n: (−α*)^{d}
            out[[m, n]] = C64::from_polar(mag, d as f64 * th);
            if d > 0 {
                let sign = if d % 2 == 0 { 1.0 } else { -1.0 };
                out[[n, m]] = C64::from_polar(mag * sign, -(d as f64) * th);
            }
        }
    }
    out
}

/// Largest element difference after aligning the global phase on the largest element of `b`.
pub fn max_diff_mod_phase(a: &Array2<C64>, b: &Array2<C64>) -> f64 {
    let (mut best, mut at) = (0.0, (0, 0));
    for ((i, j), z) in b.indexed_iter() {
        if z.norm() > best {
            best = z.norm();
            at = (i, j);
        }
    }
    let phase = if best > 0.0 && a[at].norm() > 0.0 { (a[at] / b[at]).arg() } else { 0.0 };
    let ph = C64::from_polar(1.0, phase);
    a.iter().zip(b.iter()).fold(0.0f64, |m, (x, y)| m.max((x - y * ph).norm()))
}

/// Largest deviation of U†U from the identity on the leading `block` levels.
pub fn unitarity_defect(u: &Array2<C64>, block: usize) -> f64 {
    let sub = u.slice(s![.., ..block]).to_owned();
    let g = dagger(&sub).dot(&sub) - Array2::<C64>::eye(block);
    g.iter().fold(0.0f64, |m, z| m.max(z.norm()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs;
    use ndarray_linalg::{Eigh, UPLO};

    fn q() -> CanonicalPolynomial {
        CanonicalPolynomial::q(0, 1)
    }
    fn p() -> CanonicalPolynomial {
        CanonicalPolynomial::p(0, 1)
    }

    #[test]
    fn canonical_commutator_away_from_boundary() {
        let n = 20;
        let qm = operator_matrix(&q(), n).unwrap().matrix;
        let pm = operator_matrix(&p(), n).unwrap().matrix;
        let c = qm.dot(&pm) - pm.dot(&qm);
        let block = c.slice(s![..n - 2, ..n - 2]).to_owned() - Array2::<C64>::eye(n - 2).mapv(|z| z * C64::i());
        assert!(max_abs(&block) < 1e-12);
    }

    #[test]
    fn identity_matrix() {
        let m = operator_matrix(&CanonicalPolynomial::identity(2), 5).unwrap();
        assert!(max_abs(&(m.matrix - Array2::<C64>::eye(25))) == 0.0);
        assert!(operator_matrix(&q(), 1).is_err());
    }

    #[test]
    fn oscillator_spectrum() {
        let n = 30;
        let h = (&q().pow(2) + &p().pow(2)).scale(0.5);
        let m = operator_matrix(&h, n).unwrap().matrix;
        let (w, _) = m.eigh(UPLO::Upper).unwrap();
        for k in 0..(n * 8 / 10) {
            assert!((w[k] - (k as f64 + 0.5)).abs() < 1e-10, "{k}: {}", w[k]);
        }
    }

    #[test]
    fn exact_truncation_of_products() {
        let n = 12;
        let a = operator_matrix(&q().pow(3), n + 3).unwrap().matrix;
        let b = operator_matrix(&p(), n + 3).unwrap().matrix;
        let direct = operator_matrix(&(&q().pow(3) * &p()), n).unwrap().matrix;
        let prod = a.dot(&b).slice(s![..n, ..n]).to_owned();
        assert!(max_abs(&(direct - prod)) < 1e-10);
    }

    #[test]
    fn closed_form_displacement_matches_exponential() {
        let n = 30;
        let g = GateSpec::displacement(0.8, -1.1);
        let (u, c) = gate_matrix_converged(&g, n, 1e-12, 200, ExpMethod::Pade).unwrap();
        assert!(c.converged);
        let d = displacement_matrix(0.8, -1.1, n);
        assert!(max_abs(&(u.matrix - d)) < 1e-10);
    }

    #[test]
    fn identity_gate() {
        let u = gate_matrix(&GateSpec::identity(1), 10, Truncation::default()).unwrap();
        assert!(max_abs(&(u.matrix - Array2::<C64>::eye(10))) < 1e-14);
    }

    #[test]
    fn eigh_and_pade_agree() {
        let h = operator_matrix(&q().pow(3), 40).unwrap().matrix;
        let a = exp_hermitian(&h, C64::new(0.0, 0.05), ExpMethod::Pade).unwrap();
        let b = exp_hermitian(&h, C64::new(0.0, 0.05), ExpMethod::Eigh).unwrap();
        assert!(max_abs(&(a - b)) < 1e-9);
    }

    #[test]
    fn quadratic_gates_are_unitary() {
        let n = 40;
        for g in [GateSpec::squeezer(0.3), GateSpec::rotation(0.7), GateSpec::displacement(1.0, 0.5)] {
            // low columns stay well inside the retained block
            let u = gate_matrix(&g, n, Truncation { pad: 40, method: ExpMethod::Pade }).unwrap();
            assert!(unitarity_defect(&u.matrix, n / 4) < 1e-8);
        }
    }

    #[test]
    fn phase_alignment() {
        let a = Array2::from_elem((2, 2), C64::new(0.0, 1.0));
        let b = Array2::from_elem((2, 2), C64::new(1.0, 0.0));
        assert!(max_diff_mod_phase(&a, &b) < 1e-15);
    }

    #[test]
    fn two_mode_kron_ordering() {
        let n = 4;
        let m = operator_matrix(&CanonicalPolynomial::number(1, 2), n).unwrap().matrix;
        // basis |n0, n1⟩ at index n0*N + n1
        assert!((m[[1, 1]].re - 1.0).abs() < 1e-14);
        assert!(m[[n, n]].norm() < 1e-14);
    }
}
