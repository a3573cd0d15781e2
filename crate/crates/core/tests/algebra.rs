use ndarray::s;
use num_complex::Complex64 as C64;
use proptest::prelude::*;

use cvteleport::algebra::{
    classify, clifford_decompose, format_gate, heisenberg_evolve, parse_gate_expression, parse_polynomial, CanonicalPolynomial,
    GateSpec, HierarchyLevel, Monomial, DEFAULT_MAX_DEPTH,
};
use cvteleport::fock::operator_matrix;
use cvteleport::linalg::{max_abs, symplectic_defect};

// Quarter-integer coefficients keep every product exact in binary floating point.
fn poly(nmodes: usize, max_exp: u32) -> impl Strategy<Value = CanonicalPolynomial> {
    let term = (prop::collection::vec(0..=max_exp, 2 * nmodes), -8i32..=8, -8i32..=8);
    prop::collection::vec(term, 0..4).prop_map(move |ts| {
        CanonicalPolynomial::from_terms(
            nmodes,
            ts.into_iter().map(|(e, re, im)| (Monomial::from_exponents(e), C64::new(re as f64 / 4.0, im as f64 / 4.0))),
        )
    })
}

fn comm(a: &CanonicalPolynomial, b: &CanonicalPolynomial) -> CanonicalPolynomial {
    a.commutator(b).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn ring_axioms(a in poly(2, 2), b in poly(2, 2), c in poly(2, 2)) {
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&(&a + &b) * &c, &(&a * &c) + &(&b * &c));
        prop_assert_eq!(&a + &b, &b + &a);
        let one = CanonicalPolynomial::identity(2);
        prop_assert_eq!(&a * &one, a.clone());
        prop_assert!((&a - &a).is_zero());
    }

    #[test]
    fn lie_bracket(a in poly(1, 3), b in poly(1, 3), c in poly(1, 3)) {
        let jacobi = comm(&a, &comm(&b, &c)) + comm(&b, &comm(&c, &a)) + comm(&c, &comm(&a, &b));
        prop_assert!(jacobi.is_zero(), "{}", jacobi);
        prop_assert_eq!(comm(&a, &b), -comm(&b, &a));
        // Leibniz rule
        prop_assert_eq!(comm(&a, &(&b * &c)), &comm(&a, &b) * &c + &b * &comm(&a, &c));
    }

    #[test]
    fn adjoint_reverses_products(a in poly(2, 2), b in poly(2, 2)) {
        prop_assert_eq!((&a * &b).adjoint(), &b.adjoint() * &a.adjoint());
        prop_assert_eq!(a.adjoint().adjoint(), a.clone());
        let h = &a + &a.adjoint();
        prop_assert!(h.is_hermitian());
    }

    // Truncated matrices multiply exactly once the right factor's reach fits the working cutoff.
    #[test]
    fn matrix_representation_is_multiplicative(a in poly(1, 2), b in poly(1, 2)) {
        let n = 10;
        let m = n + 4;
        let am = operator_matrix(&a, m).unwrap().matrix;
        let bm = operator_matrix(&b, m).unwrap().matrix;
        let prod = am.dot(&bm).slice(s![..n, ..n]).to_owned();
        let direct = operator_matrix(&(&a * &b), n).unwrap().matrix;
        let scale = max_abs(&direct).max(1.0);
        prop_assert!(max_abs(&(prod - direct)) <= 1e-8 * scale);
    }

    #[test]
    fn polynomial_text_round_trips(a in poly(2, 3)) {
        let back = parse_polynomial(&a.to_string(), Some(2)).unwrap();
        prop_assert_eq!(back, a);
    }

    #[test]
    fn gaussian_evolution_is_affine_and_symplectic(th in -3.0f64..3.0, r in -1.0f64..1.0, q0 in -2.0f64..2.0, p0 in -2.0f64..2.0) {
        let g = GateSpec::Sequence(vec![GateSpec::rotation(th), GateSpec::squeezer(r), GateSpec::displacement(q0, p0)]);
        let a = clifford_decompose(&g).unwrap();
        prop_assert!(symplectic_defect(&a.s) < 1e-12);
        for k in 0..2 {
            let x = CanonicalPolynomial::coordinate(k, 1);
            let img = heisenberg_evolve(&g, &x, DEFAULT_MAX_DEPTH).unwrap();
            let want = a.conjugation_images()[k].clone();
            prop_assert!((img - want).max_coeff() < 1e-12);
        }
        prop_assert_eq!(classify(&g, 4).unwrap(), HierarchyLevel::Level(if r == 0.0 && th == 0.0 { 1 } else { 2 }));
    }
}

#[test]
fn canonical_commutator_is_i() {
    let q = CanonicalPolynomial::q(0, 2);
    let p = CanonicalPolynomial::p(0, 2);
    assert_eq!(comm(&q, &p), CanonicalPolynomial::scalar(2, C64::new(0.0, 1.0)));
    assert!(comm(&q, &CanonicalPolynomial::p(1, 2)).is_zero());
}

#[test]
fn gate_printer_is_idempotent() {
    for text in [
        "(displace 1 0)",
        "(exp (poly \"q^3\") 0.1)",
        "(seq (exp (poly \"q^3\") 0.1) (displace 1 0))",
        "(bs 0.7853981633974483 0 1)",
        "(cphase 1 0 1 3)",
        "(affine ((1 0) (0.5 1)) (0 0) 0)",
    ] {
        let once = format_gate(&parse_gate_expression(text).unwrap());
        let twice = format_gate(&parse_gate_expression(&once).unwrap());
        assert_eq!(once, twice, "{text}");
    }
}

#[test]
fn parse_errors_report_positions() {
    match parse_gate_expression("(seq (displace 1 0) (warp 2))") {
        Err(cvteleport::Error::Parse { pos, .. }) => assert_eq!(pos, 20),
        other => panic!("{other:?}"),
    }
    assert!(parse_gate_expression("(displace 1)").is_err());
    assert!(parse_gate_expression("(cphase 1 0 0)").is_err());
}

#[test]
fn conjugation_chain_of_cubic_gate() {
    // V(γ) p V(γ)† picks up −3γq², which in turn shears to a Pauli under a second conjugation
    let g = 0.2;
    let v = GateSpec::cubic(g);
    let img = heisenberg_evolve(&v, &CanonicalPolynomial::p(0, 1), DEFAULT_MAX_DEPTH).unwrap();
    let want = CanonicalPolynomial::p(0, 1) - CanonicalPolynomial::mode_monomial(0, 1, 2, 0, 3.0 * g);
    assert_eq!(img, want);
    assert_eq!(classify(&GateSpec::exponential(img, 1.0), 4).unwrap(), HierarchyLevel::Level(2));
}
