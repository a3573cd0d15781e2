//! Higher-order gates from lower-order ones: e^{iAt} e^{iBt} e^{−iAt} e^{−iBt} ≈ e^{t²[A,B]}.

use ndarray::s;
use num_complex::Complex64 as C64;

use crate::algebra::{CanonicalPolynomial, GateSpec};
use crate::error::{Error, Result};
use crate::fock::{converge, gate_matrix_full, Convergence, ExpMethod};
use crate::linalg::op_norm;

fn check_hermitian(h: &CanonicalPolynomial) -> Result<()> {
    let d = h.hermitian_defect();
    if d > 1e-12 * h.max_coeff().max(1.0) {
        return Err(Error::NotHermitian(d));
    }
    Ok(())
}

/// The four-factor sequence in time order: e^{iAt} first, e^{−iBt} last.
pub fn group_commutator(a: &CanonicalPolynomial, b: &CanonicalPolynomial, t: f64) -> Result<GateSpec> {
    check_hermitian(a)?;
    check_hermitian(b)?;
    let n = a.nmodes().max(b.nmodes());
    let (a, b) = (a.embed(n), b.embed(n));
    Ok(GateSpec::Sequence(vec![
        GateSpec::exponential(a.clone(), t),
        GateSpec::exponential(b.clone(), t),
        GateSpec::exponential(a, -t),
        GateSpec::exponential(b, -t),
    ]))
}

/// exp(i·([A,B]/i)·t²), what the sequence approximates.
pub fn commutator_target(a: &CanonicalPolynomial, b: &CanonicalPolynomial, t: f64) -> Result<GateSpec> {
    let n = a.nmodes().max(b.nmodes());
    let c = a.embed(n).commutator(&b.embed(n))?.scale(C64::new(0.0, -1.0));
    Ok(GateSpec::exponential(c, t * t))
}

/// Operator-norm distance between the sequence and its target on the lowest `block` levels,
/// with the working cutoff grown until the retained N×N block is stable to `tol`.
pub fn commutator_error(
    a: &CanonicalPolynomial,
    b: &CanonicalPolynomial,
    t: f64,
    cutoff: usize,
    block: usize,
    tol: f64,
    max_cutoff: usize,
) -> Result<(f64, Convergence)> {
    if block > cutoff {
        return Err(Error::Domain(format!("block {block} exceeds cutoff {cutoff}")));
    }
    let seq = group_commutator(a, b, t)?;
    let target = commutator_target(a, b, t)?;
    let n = seq.nmodes();
    if n != 1 {
        return Err(Error::Domain("commutator error is evaluated for single-mode generators".into()));
    }
    let method = ExpMethod::Eigh;
    let (diff, conv) = converge(cutoff, 1, tol, cutoff + 8, max_cutoff, |w| {
        Ok(gate_matrix_full(&seq, w, 1, method)? - gate_matrix_full(&target, w, 1, method)?)
    })?;
    let blk = diff.slice(s![..block, ..block]).to_owned();
    Ok((op_norm(&blk), conv))
}

/// Least-squares slope of log(err) against log(t).
pub fn loglog_slope(ts: &[f64], errs: &[f64]) -> f64 {
    let xs: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
    let ys: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let k = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / k, ys.iter().sum::<f64>() / k);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}
