use std::str::FromStr;

use cycleguard::conditions::{
    check_hg, check_l2l3, check_odd_conditions, check_tplus, full_report, transformed_piece,
    TheoremStatus,
};
use cycleguard::gallery;
use cycleguard::poly::{Polynomial, SignVerdict};
use cycleguard::system::{
    Coefficient, Domain, PlanarSystem, StructuredSystem, TrinomialDecomposition, TrinomialPiece,
};
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use proptest::prelude::*;

fn poly_str(c: &[i64]) -> String {
    let mut s = String::from("0");
    for (i, v) in c.iter().enumerate() {
        s.push_str(&format!(" + ({v})*x^{i}"));
    }
    s
}

/// Sign of `p` at the witness abscissa, exactly when the witness carries an
/// exact point.
fn sign_at_witness(p: &Polynomial, v: &SignVerdict) -> Option<i8> {
    let w = v.witness()?;
    let value = match &w.x_exact {
        Some(s) => {
            let r = p.eval(&BigRational::from_str(s).expect("exact witness parses"));
            if r.is_zero() {
                0.0
            } else if r.is_positive() {
                1.0
            } else {
                -1.0
            }
        }
        None => p.eval_f64(w.x),
    };
    Some(if value > 0.0 {
        1
    } else if value < 0.0 {
        -1
    } else {
        0
    })
}

fn term(terms: &[(u32, Polynomial)], j: u32) -> Polynomial {
    terms
        .iter()
        .find(|(k, _)| *k == j)
        .map(|(_, p)| p.clone())
        .unwrap_or_default()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn refutations_come_with_violating_witnesses(
        f1 in proptest::collection::vec(-3i64..4, 1..5),
        f3 in proptest::collection::vec(-3i64..4, 1..5),
    ) {
        let s = StructuredSystem::parse("x", &[(1, &poly_str(&f1)), (3, &poly_str(&f3))], Domain::whole()).unwrap();
        let terms = s.polynomial_terms().unwrap();

        for (j, v) in &check_odd_conditions(&s).odd_terms {
            let e = term(&terms, *j).euler_combination(*j as i64 - 1);
            if let Some(sg) = sign_at_witness(&e, v) {
                prop_assert_eq!(sg, -1, "Euler witness {:?}", v);
            }
        }
        let l = check_l2l3(&s);
        for (j, v) in &l.nonnegative {
            if let Some(sg) = sign_at_witness(&term(&terms, *j), v) {
                prop_assert_eq!(sg, -1, "nonnegativity witness {:?}", v);
            }
        }
        for (j, v) in &l.monotone {
            let d = term(&terms, *j).derivative();
            if let Some(sg) = sign_at_witness(&d, v) {
                let x = v.witness().unwrap().x;
                prop_assert_eq!(sg, if x > 0.0 { -1 } else { 1 }, "monotonicity witness {:?}", v);
            }
        }
        let dec = s.trinomials().unwrap();
        for c in check_tplus(&dec, s.domain()) {
            let (k, _, e, d) = transformed_piece(&dec.pieces[c.piece]).unwrap();
            if let Some(sg) = sign_at_witness(&d, &c.discriminant) {
                prop_assert_eq!(sg, 1);
            }
            if let Some(sg) = sign_at_witness(&k, &c.leading) {
                prop_assert_eq!(sg, -1);
            }
            if let Some(sg) = sign_at_witness(&e, &c.trailing) {
                prop_assert_eq!(sg, -1);
            }
        }
    }

    #[test]
    fn identity_g_reduces_hg_to_euler(coeffs in proptest::collection::vec(-3i64..4, 1..6), k in 0u32..3) {
        let j = 2 * k + 1;
        let f = poly_str(&coeffs);
        let s = StructuredSystem::parse("x", &[(j, &f)], Domain::whole()).unwrap();
        let euler = check_odd_conditions(&s).odd_terms;
        let hg = check_hg(&Coefficient::parse(&f).unwrap(), &Coefficient::parse("x").unwrap(), j, Domain::whole()).unwrap();
        let euler_pass = euler.first().is_none_or(|(_, v)| v.passes());
        prop_assert_eq!(hg.verdict.passes(), euler_pass);
        prop_assert!(hg.verdict.is_proved() || hg.verdict.is_refuted());
    }

    #[test]
    fn euler_inequalities_imply_nonnegativity(
        f3 in proptest::collection::vec(-3i64..4, 1..6),
        f5 in proptest::collection::vec(-3i64..4, 1..4),
    ) {
        let s = StructuredSystem::parse("x", &[(1, "x^2 - 1"), (3, &poly_str(&f3)), (5, &poly_str(&f5))], Domain::whole())
            .unwrap();
        let l = check_l2l3(&s);
        if check_odd_conditions(&s).odd_terms.iter().all(|(_, v)| v.is_proved()) {
            prop_assert!(l.l2.is_proved());
            prop_assert_eq!(l.euler_implies_l2, Some(true));
        }
    }
}

#[test]
fn gallery_systems_passing_euler_also_pass_nonnegativity() {
    for e in gallery::all() {
        let PlanarSystem::Structured(s) = e.load() else {
            continue;
        };
        if let Some(implied) = check_l2l3(&s).euler_implies_l2 {
            assert!(implied, "{}", e.name);
        }
    }
}

#[test]
fn quartic_family_transforms_exactly() {
    let f = Polynomial::from_i64s(&[1, 0, -1, 0, 1]);
    for k in 1..=3i64 {
        assert_eq!(
            f.euler_combination(2 * k),
            Polynomial::from_i64s(&[2 * k, 0, -(2 + 2 * k), 0, 4 + 2 * k])
        );
        let piece = TrinomialPiece::pure(Coefficient::poly(f.clone()), k as u32);
        let checks = check_tplus(&TrinomialDecomposition::new(vec![piece]), Domain::whole());
        assert!(
            checks[0].verdict.is_proved(),
            "k = {k}: {:?}",
            checks[0].verdict
        );
    }
}

#[test]
fn sampled_hypotheses_never_yield_a_certified_claim() {
    let s = StructuredSystem::parse(
        "x",
        &[(1, "-exp(-x^2)"), (3, "1 - exp(-x^2)")],
        Domain::whole(),
    )
    .unwrap();
    let r = full_report(&s);
    assert!(!r.certified);
    for t in &r.theorems {
        let sampled = t
            .hypotheses
            .iter()
            .filter_map(|h| r.hypothesis(h))
            .any(|h| matches!(h.verdict, SignVerdict::SampledPass { .. }));
        if sampled {
            assert_ne!(
                t.status,
                TheoremStatus::Applicable,
                "{} proved from sampled data",
                t.id
            );
        }
    }
}
