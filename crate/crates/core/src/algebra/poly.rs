use std::cmp::Ordering;
use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// A normal-ordered monomial: per mode an exponent pair (a, b) for q^a p^b.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn identity(nmodes: usize) -> Self {
        Monomial(vec![0; 2 * nmodes])
    }

    /// Build from interleaved exponents [a0, b0, a1, b1, ...].
    pub fn from_exponents(exps: Vec<u32>) -> Self {
        assert!(exps.len().is_multiple_of(2) && !exps.is_empty());
        Monomial(exps)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn nmodes(&self) -> usize {
        self.0.len() / 2
    }

    pub fn pair(&self, mode: usize) -> (u32, u32) {
        (self.0[2 * mode], self.0[2 * mode + 1])
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    fn embed(&self, nmodes: usize) -> Self {
        let mut e = self.0.clone();
        e.resize(2 * nmodes, 0);
        Monomial(e)
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn binom(n: u32, k: u32) -> u128 {
    let mut r: u128 = 1;
    for j in 0..k {
        r = r * (n - j) as u128 / (j + 1) as u128;
    }
    r
}

fn pow_neg_i(k: u32) -> C64 {
    match k % 4 {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, -1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, 1.0),
    }
}

/// p^b q^c = Σ_k k!·C(b,k)·C(c,k)·(−i)^k q^{c−k} p^{b−k}
fn reorder(b: u32, c: u32) -> Vec<(u32, C64)> {
    let mut out = Vec::with_capacity(b.min(c) as usize + 1);
    let mut fact: u128 = 1;
    for k in 0..=b.min(c) {
        if k > 0 {
            fact *= k as u128;
        }
        let w = (fact * binom(b, k) * binom(c, k)) as f64;
        out.push((k, pow_neg_i(k) * w));
    }
    out
}

fn mono_mul(m1: &Monomial, m2: &Monomial) -> Vec<(Monomial, C64)> {
    let n = m1.nmodes();
    let mut acc: Vec<(Vec<u32>, C64)> = vec![(Vec::with_capacity(2 * n), C64::new(1.0, 0.0))];
    for i in 0..n {
        let (a, b) = m1.pair(i);
        let (c, d) = m2.pair(i);
        let opts = reorder(b, c);
        let mut next = Vec::with_capacity(acc.len() * opts.len());
        for (e, w) in &acc {
            for &(k, ck) in &opts {
                let mut e2 = e.clone();
                e2.push(a + c - k);
                e2.push(b + d - k);
                next.push((e2, w * ck));
            }
        }
        acc = next;
    }
    acc.into_iter().map(|(e, w)| (Monomial(e), w)).collect()
}

/// Polynomial in canonical operators q_i, p_i kept in normal order
/// (q before p within a mode, modes ascending), with [q_i, p_j] = iδ_ij.
#[derive(Clone, Debug, PartialEq)]
pub struct CanonicalPolynomial {
    nmodes: usize,
    terms: BTreeMap<Monomial, C64>,
}

impl CanonicalPolynomial {
    pub fn zero(nmodes: usize) -> Self {
        assert!(nmodes > 0, "at least one mode");
        CanonicalPolynomial { nmodes, terms: BTreeMap::new() }
    }

    pub fn scalar(nmodes: usize, c: impl Into<C64>) -> Self {
        let mut p = Self::zero(nmodes);
        p.add_term(Monomial::identity(nmodes), c.into());
        p
    }

    pub fn identity(nmodes: usize) -> Self {
        Self::scalar(nmodes, 1.0)
    }

    /// q^a p^b on one mode.
    pub fn mode_monomial(mode: usize, nmodes: usize, a: u32, b: u32, c: impl Into<C64>) -> Self {
        assert!(mode < nmodes);
        let mut e = vec![0; 2 * nmodes];
        e[2 * mode] = a;
        e[2 * mode + 1] = b;
        let mut p = Self::zero(nmodes);
        p.add_term(Monomial(e), c.into());
        p
    }

    pub fn q(mode: usize, nmodes: usize) -> Self {
        Self::mode_monomial(mode, nmodes, 1, 0, 1.0)
    }

    pub fn p(mode: usize, nmodes: usize) -> Self {
        Self::mode_monomial(mode, nmodes, 0, 1, 1.0)
    }

    /// Canonical coordinate x_k in (q1,p1,...) order.
    pub fn coordinate(k: usize, nmodes: usize) -> Self {
        if k.is_multiple_of(2) {
            Self::q(k / 2, nmodes)
        } else {
            Self::p(k / 2, nmodes)
        }
    }

    pub fn from_terms(nmodes: usize, terms: impl IntoIterator<Item = (Monomial, C64)>) -> Self {
        let mut p = Self::zero(nmodes);
        for (m, c) in terms {
            assert_eq!(m.nmodes(), nmodes);
            p.add_term(m, c);
        }
        p
    }

    /// Number operator (q² + p² − 1)/2 on one mode.
    pub fn number(mode: usize, nmodes: usize) -> Self {
        let q2 = Self::mode_monomial(mode, nmodes, 2, 0, 0.5);
        let p2 = Self::mode_monomial(mode, nmodes, 0, 2, 0.5);
        q2 + p2 - Self::scalar(nmodes, 0.5)
    }

    pub fn nmodes(&self) -> usize {
        self.nmodes
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &C64)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: &Monomial) -> C64 {
        self.terms.get(m).copied().unwrap_or_default()
    }

    pub fn scalar_part(&self) -> C64 {
        self.coeff(&Monomial::identity(self.nmodes))
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).max()
    }

    pub fn add_term(&mut self, m: Monomial, c: C64) {
        if c == C64::default() {
            return;
        }
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if *o.get() == C64::default() {
                    o.remove();
                }
            }
        }
    }

    /// Same polynomial viewed on `nmodes ≥ self.nmodes()` modes.
    pub fn embed(&self, nmodes: usize) -> Self {
        assert!(nmodes >= self.nmodes);
        if nmodes == self.nmodes {
            return self.clone();
        }
        Self::from_terms(nmodes, self.terms.iter().map(|(m, c)| (m.embed(nmodes), *c)))
    }

    fn check_modes(&self, other: &Self) -> Result<()> {
        if self.nmodes != other.nmodes {
            return Err(Error::ModeMismatch(self.nmodes, other.nmodes));
        }
        Ok(())
    }

    pub fn scale(&self, c: impl Into<C64>) -> Self {
        let c = c.into();
        Self::from_terms(self.nmodes, self.terms.iter().map(|(m, v)| (m.clone(), v * c)))
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_modes(other)?;
        let mut r = self.clone();
        for (m, c) in &other.terms {
            r.add_term(m.clone(), *c);
        }
        Ok(r)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check_modes(other)?;
        let mut r = self.clone();
        for (m, c) in &other.terms {
            r.add_term(m.clone(), -*c);
        }
        Ok(r)
    }

    /// Normal-ordered product.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        self.check_modes(other)?;
        let mut r = Self::zero(self.nmodes);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                let w = c1 * c2;
                for (m, v) in mono_mul(m1, m2) {
                    r.add_term(m, v * w);
                }
            }
        }
        Ok(r)
    }

    /// [self, other], with each pair of monomials reduced before weighting so that
    /// leading terms cancel exactly.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.check_modes(other)?;
        let mut r = Self::zero(self.nmodes);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                let mut local = Self::zero(self.nmodes);
                for (m, v) in mono_mul(m1, m2) {
                    local.add_term(m, v);
                }
                for (m, v) in mono_mul(m2, m1) {
                    local.add_term(m, -v);
                }
                let w = c1 * c2;
                for (m, v) in local.terms {
                    r.add_term(m, v * w);
                }
            }
        }
        Ok(r)
    }

    /// Hermitian adjoint, renormalized.
    pub fn adjoint(&self) -> Self {
        let n = self.nmodes;
        let mut r = Self::zero(n);
        for (m, c) in &self.terms {
            // reversed word is Π_i p_i^b q_i^a
            let mut acc: Vec<(Vec<u32>, C64)> = vec![(Vec::with_capacity(2 * n), c.conj())];
            for i in 0..n {
                let (a, b) = m.pair(i);
                let opts = reorder(b, a);
                let mut next = Vec::with_capacity(acc.len() * opts.len());
                for (e, w) in &acc {
                    for &(k, ck) in &opts {
                        let mut e2 = e.clone();
                        e2.push(a - k);
                        e2.push(b - k);
                        next.push((e2, w * ck));
                    }
                }
                acc = next;
            }
            for (e, w) in acc {
                r.add_term(Monomial(e), w);
            }
        }
        r
    }

    pub fn is_hermitian(&self) -> bool {
        self.adjoint() == *self
    }

    /// Largest coefficient of the anti-Hermitian part.
    pub fn hermitian_defect(&self) -> f64 {
        let d = self.try_sub(&self.adjoint()).expect("same modes");
        d.max_coeff() / 2.0
    }

    pub fn max_coeff(&self) -> f64 {
        self.terms.values().fold(0.0, |m, c| m.max(c.norm()))
    }

    /// Drop coefficients with modulus at most `tol`.
    pub fn chop(&self, tol: f64) -> Self {
        Self::from_terms(self.nmodes, self.terms.iter().filter(|(_, c)| c.norm() > tol).map(|(m, c)| (m.clone(), *c)))
    }

    /// Terms whose degree lies in `lo..=hi`.
    pub fn degree_range(&self, lo: u32, hi: u32) -> Self {
        Self::from_terms(
            self.nmodes,
            self.terms.iter().filter(|(m, _)| (lo..=hi).contains(&m.degree())).map(|(m, c)| (m.clone(), *c)),
        )
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut r = Self::identity(self.nmodes);
        for _ in 0..k {
            r = r.multiply(self).expect("same modes");
        }
        r
    }

    /// Replace every canonical coordinate x_j by the polynomial `images[j]`, keeping the
    /// operator order of each monomial.
    pub fn substitute(&self, images: &[CanonicalPolynomial]) -> Result<Self> {
        assert_eq!(images.len(), 2 * self.nmodes);
        let n = images[0].nmodes;
        let mut cache: Vec<Vec<CanonicalPolynomial>> = images.iter().map(|x| vec![Self::identity(n), x.clone()]).collect();
        let mut r = Self::zero(n);
        for (m, c) in &self.terms {
            let mut term = Self::scalar(n, *c);
            for (j, &e) in m.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                while cache[j].len() <= e as usize {
                    let next = cache[j].last().unwrap().multiply(&images[j])?;
                    cache[j].push(next);
                }
                term = term.multiply(&cache[j][e as usize])?;
            }
            r = r.try_add(&term)?;
        }
        Ok(r)
    }
}

impl Add for CanonicalPolynomial {
    type Output = CanonicalPolynomial;
    fn add(self, rhs: Self) -> Self {
        self.try_add(&rhs).expect("mode-count mismatch")
    }
}

impl Sub for CanonicalPolynomial {
    type Output = CanonicalPolynomial;
    fn sub(self, rhs: Self) -> Self {
        self.try_sub(&rhs).expect("mode-count mismatch")
    }
}

impl<'a> Add<&'a CanonicalPolynomial> for &'a CanonicalPolynomial {
    type Output = CanonicalPolynomial;
    fn add(self, rhs: Self) -> CanonicalPolynomial {
        self.try_add(rhs).expect("mode-count mismatch")
    }
}

impl<'a> Sub<&'a CanonicalPolynomial> for &'a CanonicalPolynomial {
    type Output = CanonicalPolynomial;
    fn sub(self, rhs: Self) -> CanonicalPolynomial {
        self.try_sub(rhs).expect("mode-count mismatch")
    }
}

impl<'a> Mul<&'a CanonicalPolynomial> for &'a CanonicalPolynomial {
    type Output = CanonicalPolynomial;
    fn mul(self, rhs: Self) -> CanonicalPolynomial {
        self.multiply(rhs).expect("mode-count mismatch")
    }
}

impl Mul for CanonicalPolynomial {
    type Output = CanonicalPolynomial;
    fn mul(self, rhs: Self) -> Self {
        self.multiply(&rhs).expect("mode-count mismatch")
    }
}

impl Neg for CanonicalPolynomial {
    type Output = CanonicalPolynomial;
    fn neg(self) -> Self {
        self.scale(-1.0)
    }
}

pub(crate) fn fmt_f64(x: f64) -> String {
    if x == x.trunc() && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{}", x)
    }
}

fn fmt_coeff(c: C64) -> (bool, String) {
    // (negative, magnitude text) for purely real/imaginary values, else parenthesized
    if c.im == 0.0 {
        (c.re < 0.0, fmt_f64(c.re.abs()))
    } else if c.re == 0.0 {
        (c.im < 0.0, format!("{}i", fmt_f64(c.im.abs())))
    } else {
        let sign = if c.im < 0.0 { "-" } else { "+" };
        (false, format!("({}{}{}i)", fmt_f64(c.re), sign, fmt_f64(c.im.abs())))
    }
}

impl fmt::Display for CanonicalPolynomial {
    /// Parseable text such as `q0^3 - 3i*q0^2 + 0.5*q0*p1`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (idx, (m, c)) in self.terms.iter().rev().enumerate() {
            let mut factors = Vec::new();
            for i in 0..m.nmodes() {
                let (a, b) = m.pair(i);
                for (ch, e) in [('q', a), ('p', b)] {
                    match e {
                        0 => {}
                        1 => factors.push(format!("{ch}{i}")),
                        _ => factors.push(format!("{ch}{i}^{e}")),
                    }
                }
            }
            let (neg, mag) = fmt_coeff(*c);
            let body = if factors.is_empty() {
                mag
            } else if mag == "1" {
                factors.join("*")
            } else {
                format!("{}*{}", mag, factors.join("*"))
            };
            match (idx, neg) {
                (0, false) => write!(f, "{body}")?,
                (0, true) => write!(f, "-{body}")?,
                (_, false) => write!(f, " + {body}")?,
                (_, true) => write!(f, " - {body}")?,
            }
        }
        Ok(())
    }
}
