use std::collections::HashMap;

use proptest::prelude::*;

use g2cert::catalog::find_builtin;
use g2cert::certify::{entry_candidate, sample_falsify, SamplingProblem};
use g2cert::exact_arith::{Polynomial, Rational, Var};
use g2cert::exec::Parallelism;
use g2cert::exterior::{det_via_pullback, generic_form, pullback, KForm};
use g2cert::hitchin::{
    k_psi, lambda, lambda_numeric, standard_su3_pair, su3_check, PositivityMode, Su3Outcome,
};

fn rational() -> impl Strategy<Value = Rational> {
    (-20i64..=20, 1i64..=5).prop_map(|(n, d)| Rational::new(n, d))
}

fn three_form() -> impl Strategy<Value = KForm> {
    proptest::collection::vec(rational(), 20).prop_map(|cs| {
        let mut f = KForm::zero(6, 3);
        let masks = (0u16..64).filter(|m| m.count_ones() == 3);
        for (m, c) in masks.zip(cs) {
            f.add_term(m, Polynomial::constant(c));
        }
        f
    })
}

fn matrix() -> impl Strategy<Value = Vec<Vec<Polynomial>>> {
    proptest::collection::vec(proptest::collection::vec(-3i64..=3, 6), 6).prop_map(|rows| {
        rows.into_iter()
            .map(|r| r.into_iter().map(Polynomial::int).collect())
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    // k_psi itself verifies K² = λ·Id and errors otherwise.
    #[test]
    fn k_squares_to_lambda(psi in three_form()) {
        let k = k_psi(&psi).unwrap();
        prop_assert_eq!(Some(k.lambda.as_constant().unwrap()), lambda_numeric(&psi));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lambda_transforms_by_det_squared(psi in three_form(), m in matrix()) {
        let det = det_via_pullback(&m);
        let lhs = lambda(&pullback(&m, &psi).unwrap()).unwrap();
        prop_assert_eq!(lhs, &lambda(&psi).unwrap() * &det.pow(2));
    }

    // Negative control: every invertible image of the standard pair is an
    // SU(3)-structure.
    #[test]
    fn standard_pair_orbit_passes(m in matrix()) {
        prop_assume!(!det_via_pullback(&m).is_zero());
        let (omega, psi) = standard_su3_pair();
        let omega = pullback(&m, &omega).unwrap();
        let psi = pullback(&m, &psi).unwrap();
        prop_assert_eq!(su3_check(&omega, &psi, PositivityMode::EitherSign).unwrap(), Su3Outcome::Passes);
    }

    #[test]
    fn positive_rescaling_keeps_verdict(psi in three_form(), m in matrix(), c in 1i64..50) {
        let (omega, _) = standard_su3_pair();
        let omega = pullback(&m, &omega).unwrap();
        let scaled = psi.scale_q(&Rational::new(c, 7));
        prop_assert_eq!(
            su3_check(&omega, &psi, PositivityMode::EitherSign).unwrap(),
            su3_check(&omega, &scaled, PositivityMode::EitherSign).unwrap()
        );
    }
}

#[test]
fn generic_lambda_is_quartic() {
    let psi = generic_form(6, 3, "x");
    let l = lambda(&psi).unwrap();
    assert!(l.terms().all(|(m, _)| m.degree() == 4));
    let vals: HashMap<Var, Rational> = l
        .vars()
        .into_iter()
        .map(|v| (v, Rational::from_int(0)))
        .collect();
    assert!(l.evaluate(&vals).unwrap().is_zero());
}

#[test]
fn sampler_negative_control() {
    let (omega, psi) = standard_su3_pair();
    let omega = omega.scale(&Polynomial::named("beta_1"));
    let problem = SamplingProblem::new(omega, psi, Vec::new());
    let stats = sample_falsify(&problem, 50, 7, Parallelism::Auto).unwrap();
    assert_eq!(stats.accepted, 50);
    assert_eq!(stats.passes, 50);
}

#[test]
fn sampling_modes_agree() {
    let e = find_builtin("g533_r").unwrap();
    let c = entry_candidate(&e).unwrap();
    let problem = SamplingProblem::new(c.omega, c.psi, e.atoms().unwrap());
    let a = sample_falsify(&problem, 40, 11, Parallelism::Auto).unwrap();
    let b = sample_falsify(&problem, 40, 11, Parallelism::Sequential).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.passes, 0);
}
