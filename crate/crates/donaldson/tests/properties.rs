//! Property tests for the spec-level invariants: exactness of the
//! polynomial layer, the scaling symmetry of Q, harmonic-addition
//! invariance of the family, and byte-stable serialization.

use donaldson::builder::{build_entire_solution, harmonic_catalog, split_g};
use donaldson::io::{poly_from_json_str, poly_to_json_string};
use donaldson::poly::harmonic_basis;
use donaldson::verifier::q_operator_symbolic;
use donaldson::{ExactPoly, Rational};
use num::BigInt;
use proptest::prelude::*;

fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

fn arb_rational() -> impl Strategy<Value = Rational> {
    (-20i64..=20, 1i64..=12).prop_map(|(n, d)| rat(n, d))
}

/// Random polynomial with small support, exact coefficients.
fn arb_poly(nvars: usize, max_deg: u32) -> impl Strategy<Value = ExactPoly> {
    let term = (
        proptest::collection::vec(0u32..=max_deg, nvars),
        arb_rational(),
    );
    proptest::collection::vec(term, 0..6).prop_map(move |terms| {
        let mut p = ExactPoly::zero(nvars);
        for (e, c) in terms {
            if e.iter().sum::<u32>() <= max_deg {
                p.add_term(e, c);
            }
        }
        p
    })
}

/// Random harmonic polynomial: rational combination of the basis.
fn arb_harmonic(n: usize, max_deg: u32) -> impl Strategy<Value = ExactPoly> {
    let basis = harmonic_catalog(n, max_deg).unwrap();
    let len = basis.len();
    proptest::collection::vec(arb_rational(), len).prop_map(move |coeffs| {
        let mut b = ExactPoly::zero(n);
        for (c, h) in coeffs.iter().zip(&basis) {
            b = b.add(&h.scale(c));
        }
        b
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn laplacian_is_linear(
        p in arb_poly(3, 4),
        q in arb_poly(3, 4),
        c in arb_rational(),
    ) {
        let vars = [0usize, 1, 2];
        let lhs = p.scale(&c).add(&q).laplacian(&vars).unwrap();
        let rhs = p.laplacian(&vars).unwrap().scale(&c).add(&q.laplacian(&vars).unwrap());
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn homogeneous_decomposition_round_trips(p in arb_poly(3, 5)) {
        let dec = p.homogeneous_decomposition();
        prop_assert_eq!(dec.sum(p.nvars()), p.clone());
        for w in dec.parts.windows(2) {
            prop_assert!(w[0].0 < w[1].0);
        }
        for (d, part) in &dec.parts {
            for (e, _) in part.terms_graded() {
                prop_assert_eq!(e.iter().map(|&k| k as usize).sum::<usize>(), *d);
            }
        }
    }

    #[test]
    fn q_scaling_symmetry(p in arb_poly(2, 4), lam in 1i64..=5) {
        // D^2 picks up lambda^2 under x -> lambda x, and Q is quadratic
        // in D^2 u, so Q(D^2 (lambda^-2 u(lambda .))) = Q(D^2 u)(lambda .)
        let lam_r = rat(lam, 1);
        let nv = p.nvars();
        let images: Vec<ExactPoly> = (0..nv)
            .map(|i| ExactPoly::var(nv, i).scale(&lam_r))
            .collect();
        let scaled = p.substitute_all(&images).scale(&(rat(1, 1) / (lam_r.clone() * lam_r.clone())));
        let lhs = q_operator_symbolic(&scaled);
        let rhs = q_operator_symbolic(&p).substitute_all(&images);
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn family_members_solve_exactly(
        b in arb_harmonic(2, 3),
        a_num in 1i64..=8,
        a_den in 1i64..=8,
    ) {
        let a = rat(a_num, a_den);
        let sol = build_entire_solution(&a, &b, 2, None).unwrap();
        prop_assert_eq!(q_operator_symbolic(&sol.u), ExactPoly::one(3));
    }

    #[test]
    fn harmonic_addition_preserves_solutions(
        b in arb_harmonic(2, 2),
        extra in arb_harmonic(2, 3),
        a_num in 1i64..=6,
    ) {
        let a = rat(a_num, 1);
        let sol = build_entire_solution(&a, &b, 2, Some(&extra)).unwrap();
        prop_assert_eq!(q_operator_symbolic(&sol.u), ExactPoly::one(3));
        // and split_g still sees lap f = 1/(2a)
        let (_, lap_f) = split_g(&sol).unwrap();
        prop_assert_eq!(lap_f, rat(1, 1) / (rat(2, 1) * a));
    }

    #[test]
    fn poly_serialization_round_trips(p in arb_poly(4, 5)) {
        let s = poly_to_json_string(&p).unwrap();
        let q = poly_from_json_str(&s).unwrap();
        prop_assert_eq!(&p, &q);
        // byte-stable: re-serialization is identical
        prop_assert_eq!(s, poly_to_json_string(&q).unwrap());
    }

    #[test]
    fn harmonic_basis_members_are_harmonic(n in 1usize..=3, d in 0u32..=4) {
        let vars: Vec<usize> = (0..n).collect();
        for h in harmonic_basis::<Rational>(n, d).unwrap() {
            prop_assert!(h.laplacian(&vars).unwrap().is_zero());
        }
    }
}

#[test]
fn poly_arithmetic_ring_axioms_spot() {
    // a couple of exact identities outside proptest's RNG
    let x = ExactPoly::var(2, 0);
    let y = ExactPoly::var(2, 1);
    let p = x.add(&y).pow(3);
    let q = x
        .pow(3)
        .add(&x.pow(2).mul(&y).scale(&rat(3, 1)))
        .add(&x.mul(&y.pow(2)).scale(&rat(3, 1)))
        .add(&y.pow(3));
    assert_eq!(p, q);
}
