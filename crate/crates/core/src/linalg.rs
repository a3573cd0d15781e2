//! Dense matrix helpers: matrix exponential, symplectic form, polar pieces.

use ndarray::{s, Array1, Array2};
use ndarray_linalg::{Eig, Eigh, Inverse, Lapack, OperationNorm, Scalar, UPLO};
use num_complex::Complex64 as C64;
use num_traits::ToPrimitive;

use crate::error::Result;

/// Standard symplectic form for `n` modes in (q1,p1,...,qn,pn) order.
pub fn omega(n: usize) -> Array2<f64> {
    let mut w = Array2::zeros((2 * n, 2 * n));
    for i in 0..n {
        w[[2 * i, 2 * i + 1]] = 1.0;
        w[[2 * i + 1, 2 * i]] = -1.0;
    }
    w
}

/// max |SᵀΩS − Ω|
pub fn symplectic_defect(s: &Array2<f64>) -> f64 {
    let n = s.nrows() / 2;
    let w = omega(n);
    let d = s.t().dot(&w).dot(s) - &w;
    d.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Inverse of a symplectic matrix, −Ω Sᵀ Ω.
pub fn symplectic_inverse(s: &Array2<f64>) -> Array2<f64> {
    let w = omega(s.nrows() / 2);
    -w.dot(&s.t()).dot(&w)
}

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371920351148152;

fn cst<A: Scalar>(x: f64) -> A {
    A::from_real(A::real(x))
}

/// Matrix exponential by Padé-13 scaling and squaring.
pub fn expm<A: Scalar + Lapack>(a: &Array2<A>) -> Array2<A> {
    let n = a.nrows();
    if n == 0 {
        return a.clone();
    }
    let norm = a.opnorm_one().map(|x| x.to_f64().unwrap()).unwrap_or(f64::INFINITY);
    let s = if norm > THETA13 { (norm / THETA13).log2().ceil().max(0.0) as i32 } else { 0 };
    let scale: A = cst(0.5f64.powi(s));
    let a = a.mapv(|x| x * scale);
    let ident = Array2::<A>::eye(n);
    let a2 = a.dot(&a);
    let a4 = a2.dot(&a2);
    let a6 = a4.dot(&a2);
    let b = |k: usize| -> A { cst(PADE13[k]) };
    let lin = |c6: A, c4: A, c2: A, c0: A| -> Array2<A> {
        a6.mapv(|x| x * c6) + a4.mapv(|x| x * c4) + a2.mapv(|x| x * c2) + ident.mapv(|x| x * c0)
    };
    let zero = A::zero();
    let u_inner = a6.dot(&lin(b(13), b(11), b(9), zero)) + lin(b(7), b(5), b(3), b(1));
    let u = a.dot(&u_inner);
    let v = a6.dot(&lin(b(12), b(10), b(8), zero)) + lin(b(6), b(4), b(2), b(0));
    let den = &v - &u;
    let num = &v + &u;
    let mut r = match den.inv() {
        Ok(inv) => inv.dot(&num),
        Err(_) => return Array2::from_elem((n, n), cst(f64::NAN)),
    };
    for _ in 0..s {
        r = r.dot(&r);
    }
    r
}

/// Exponential of the affine flow x' = A x + b for unit time: returns (e^A, φ(A) b).
pub fn affine_flow(a: &Array2<f64>, b: &Array1<f64>) -> (Array2<f64>, Array1<f64>) {
    let m = a.nrows();
    if a.iter().all(|&x| x == 0.0) {
        return (Array2::eye(m), b.clone());
    }
    let mut aug = Array2::zeros((m + 1, m + 1));
    aug.slice_mut(s![..m, ..m]).assign(a);
    aug.slice_mut(s![..m, m]).assign(b);
    let e = expm(&aug);
    (e.slice(s![..m, ..m]).to_owned(), e.slice(s![..m, m]).to_owned())
}

/// Real logarithm of a symmetric positive-definite matrix.
pub fn log_spd(p: &Array2<f64>) -> Result<Array2<f64>> {
    let (w, v) = p.eigh(UPLO::Upper)?;
    let lw = Array2::from_diag(&w.mapv(f64::ln));
    Ok(v.dot(&lw).dot(&v.t()))
}

/// Polar decomposition S = O·P with O orthogonal and P symmetric positive-definite.
pub fn polar(s: &Array2<f64>) -> Result<(Array2<f64>, Array2<f64>)> {
    let sts = s.t().dot(s);
    let (w, v) = sts.eigh(UPLO::Upper)?;
    let sq = Array2::from_diag(&w.mapv(|x| x.max(0.0).sqrt()));
    let isq = Array2::from_diag(&w.mapv(|x| 1.0 / x.max(f64::MIN_POSITIVE).sqrt()));
    let p = v.dot(&sq).dot(&v.t());
    let o = s.dot(&v.dot(&isq).dot(&v.t()));
    Ok((o, p))
}

/// Logarithm of an orthogonal symplectic matrix, returned as a real Hamiltonian-flow matrix.
///
/// Uses the isomorphism with U(n): in (q..., p...) block order O = [[X, −Y], [Y, X]] and
/// u = X + iY is unitary.
pub fn log_orthosymplectic(o: &Array2<f64>) -> Result<Array2<f64>> {
    let n = o.nrows() / 2;
    let mut u = Array2::<C64>::zeros((n, n));
    for j in 0..n {
        for k in 0..n {
            u[[j, k]] = C64::new(o[[2 * j, 2 * k]], o[[2 * j + 1, 2 * k]]);
        }
    }
    let (vals, vecs) = u.eig()?;
    let vinv = vecs.inv()?;
    let logs = Array2::from_diag(&vals.mapv(|z| C64::new(0.0, z.arg())));
    let lu = vecs.dot(&logs).dot(&vinv);
    // anti-Hermitian by construction; symmetrize away roundoff
    let lu = (&lu - &lu.t().mapv(|z| z.conj())).mapv(|z| z * 0.5);
    let mut out = Array2::zeros((2 * n, 2 * n));
    for j in 0..n {
        for k in 0..n {
            let z = lu[[j, k]];
            out[[2 * j, 2 * k]] = z.re;
            out[[2 * j + 1, 2 * k + 1]] = z.re;
            out[[2 * j + 1, 2 * k]] = z.im;
            out[[2 * j, 2 * k + 1]] = -z.im;
        }
    }
    Ok(out)
}

/// Eigen-decomposition of a complex Hermitian matrix, H V = V diag(w).
///
/// The LAPACK binding can hand back the conjugated eigenvector matrix depending on memory
/// layout, so one eigenpair is checked and the basis conjugated when needed.
pub fn eigh_hermitian(h: &Array2<C64>) -> Result<(Array1<f64>, Array2<C64>)> {
    let (w, v) = h.eigh(UPLO::Upper)?;
    let n = h.nrows();
    if n == 0 {
        return Ok((w, v));
    }
    let resid = |v: &Array2<C64>| {
        let col = v.column(n - 1);
        let r = h.dot(&col) - col.mapv(|z| z * w[n - 1]);
        r.iter().fold(0.0f64, |m, z| m.max(z.norm()))
    };
    let vc = v.mapv(|z| z.conj());
    if resid(&vc) < resid(&v) {
        Ok((w, vc))
    } else {
        Ok((w, v))
    }
}

pub fn max_abs<A: Scalar>(m: &Array2<A>) -> f64 {
    m.iter().fold(0.0, |acc, x| acc.max(x.abs().to_f64().unwrap()))
}

/// Largest singular value of a complex matrix.
pub fn op_norm(m: &Array2<C64>) -> f64 {
    let h = m.t().mapv(|z| z.conj()).dot(m);
    match h.eigh(UPLO::Upper) {
        Ok((w, _)) => w.iter().fold(0.0f64, |a, &b| a.max(b)).max(0.0).sqrt(),
        Err(_) => f64::NAN,
    }
}
