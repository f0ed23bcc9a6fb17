//! Truncated-window checks of the rational/nonlocal axioms: the rational
//! one-variable structure `g ι₊r(λS) • g^σ`, the constant-coefficient
//! geometric bracket with its two skew readings, a genuinely bilateral
//! series bracket, and the scalar functional-equation lemmas.

mod util;

use dmpva::ncalg::{AlgebraSignature, NCPoly};
use dmpva::rational::*;
use dmpva::scalar::{qi, qr, Q};
use dmpva::tensor::TensorElem;
use num::Zero;
use std::sync::Arc;

fn sig_u() -> Arc<AlgebraSignature> {
    AlgebraSignature::infinite(&["u"])
}

/// `r(z) = (z − z⁻¹)`-type antisymmetric rational function `z^p/(1−z^k)`
/// boilerplate: builds `(1+z)/(1−z)` by default.
fn odd_rational() -> RationalFn {
    RationalFn::new(
        Poly::new(vec![qi(1), qi(1)]),
        Poly::new(vec![qi(1), qi(-1)]),
    )
    .unwrap()
}

#[test]
fn rational_quartic_structure_passes_on_window() {
    // {{u λ u}} = g ι₊ r(λS) • g^σ with g = (αu+β)⊗(αu+β) and
    // r(λ) = (1+λ)/(1−λ): rational skew passes, Jacobi passes on the
    // probe window
    let sig = sig_u();
    let u = NCPoly::gen(&sig, 0, 0).unwrap();
    let alpha = qi(1);
    let beta = qi(1);
    let au_b = u.scale(&alpha).add(&NCPoly::constant(&sig, beta)).unwrap();
    let g = TensorElem::from_polys(&[&au_b, &au_b]).unwrap();
    let op = RationalPseudoOp::new(
        &sig,
        vec![Chain {
            coeff: qi(1),
            factors: vec![g.clone(), g.sigma()],
            rationals: vec![odd_rational()],
        }],
    )
    .unwrap();
    let mut spec = SeriesBracketSpec::new(&sig);
    let input_window = (-30, 30);
    spec.set_rational(0, 0, op, input_window).unwrap();
    let report = check_truncated_bracket(&spec, (-4, 4)).unwrap();
    let rat = report.skew_rational.expect("chain presentation given");
    assert!(rat.passed(), "rational skew failures: {:?}", rat.failures);
    assert!(rat.undetermined.is_empty());
    assert!(
        report.jacobi.passed(),
        "jacobi failures: {:?}",
        report.jacobi.failures
    );
    assert!(
        report.jacobi.undetermined.is_empty(),
        "window should be fully determined: {:?}",
        report.jacobi.undetermined
    );
    assert!(report.jacobi.points_checked > 0);
}

#[test]
fn geometric_bracket_rational_skew_vs_nonlocal_skew() {
    // {{u λ u}} = ι₊ (1+λ)/(1−λ) (1⊗1): passes the rational reading,
    // fails the nonlocal reading
    let sig = sig_u();
    let op = RationalPseudoOp::new(
        &sig,
        vec![Chain {
            coeff: qi(1),
            factors: vec![TensorElem::one(&sig, 2), TensorElem::one(&sig, 2)],
            rationals: vec![odd_rational()],
        }],
    )
    .unwrap();
    let mut spec = SeriesBracketSpec::new(&sig);
    spec.set_rational(0, 0, op, (-20, 20)).unwrap();
    // the series is 1 + 2λ + 2λ² + …
    let s = spec.entry(0, 0);
    match s.class(0) {
        CoeffClass::Known(t) => assert_eq!(t, TensorElem::one(&sig, 2)),
        _ => panic!("λ⁰ must be known"),
    }
    match s.class(3) {
        CoeffClass::Known(t) => assert_eq!(t, TensorElem::one(&sig, 2).scale(&qi(2))),
        _ => panic!("λ³ must be known"),
    }
    match s.class(-5) {
        CoeffClass::Known(t) => assert!(t.is_zero()),
        _ => panic!("negative exponents are known zero"),
    }
    let report = check_truncated_bracket(&spec, (-5, 5)).unwrap();
    let rat = report.skew_rational.expect("chain given");
    assert!(rat.passed(), "rational skew must pass: {:?}", rat.failures);
    assert!(!report.skew_nonlocal.passed(), "nonlocal skew must fail");
    // the λ⁰ coefficient already violates the nonlocal reading
    assert!(report
        .skew_nonlocal
        .failures
        .iter()
        .any(|f| f.contains("z^0")));
}

#[test]
fn bilateral_series_bracket_jacobi_on_window() {
    // {{u λ u}} = Σ rₙ (u uₙ ⊗ uₙ u) λⁿ with r(λ) = −r(λ⁻¹) given only on
    // a finite window, unknown beyond both ends: Jacobi passes on the
    // determined sub-window and the truncation is reported, not hidden
    let sig = sig_u();
    let u = NCPoly::gen(&sig, 0, 0).unwrap();
    let input = 18i64;
    let probe = 3i64;
    let mut entry = SeriesEntry::new(&sig, -input, input, Tail::Unknown, Tail::Unknown);
    // odd coefficients rₙ = 1/n-ish flavour: rₙ = sign(n) * (1 + |n| mod 3)
    for n in 1..=input {
        let c = qi(1 + (n % 3));
        let g = TensorElem::from_polys(&[&u, &u]).unwrap();
        let t = g.bullet(&g.sigma().shift(n)).unwrap();
        entry.set(n, t.scale(&c));
        // skew partner: −Sⁿ-free form r_{-n} = −rₙ with matching tensor
        let g2 = TensorElem::from_polys(&[&u, &u]).unwrap();
        let t2 = g2.bullet(&g2.sigma().shift(-n)).unwrap();
        entry.set(-n, t2.scale(&-c));
    }
    let mut spec = SeriesBracketSpec::new(&sig);
    spec.set_series(0, 0, entry);
    let report = check_truncated_bracket(&spec, (-probe, probe)).unwrap();
    assert!(
        report.skew_nonlocal.passed(),
        "nonlocal skew: {:?}",
        report.skew_nonlocal.failures
    );
    assert!(report.jacobi.passed(), "jacobi: {:?}", report.jacobi.failures);
    assert!(report.jacobi.points_checked > 0, "some points must be decidable");
}

#[test]
fn bilateral_bracket_with_wrong_signs_fails_jacobi() {
    // same shape but breaking the r(λ) = −r(λ⁻¹) symmetry on one
    // coefficient: the Jacobi defect shows up inside the window
    let sig = sig_u();
    let u = NCPoly::gen(&sig, 0, 0).unwrap();
    let input = 18i64;
    let mut entry = SeriesEntry::new(&sig, -input, input, Tail::Unknown, Tail::Unknown);
    let g = TensorElem::from_polys(&[&u, &u]).unwrap();
    for n in 1..=input {
        let c = qi(1);
        entry.set(n, g.bullet(&g.sigma().shift(n)).unwrap().scale(&c));
        let sign = if n == 1 { qi(2) } else { -c.clone() };
        entry.set(-n, g.bullet(&g.sigma().shift(-n)).unwrap().scale(&sign));
    }
    let mut spec = SeriesBracketSpec::new(&sig);
    spec.set_series(0, 0, entry);
    let report = check_truncated_bracket(&spec, (-3, 3)).unwrap();
    assert!(!report.skew_nonlocal.passed() || !report.jacobi.passed());
}

#[test]
fn lemma_scalar_identities_on_truncation() {
    // R(z) = β(1 + 2Σ z^{kn}) satisfies (R(z)+R(w))R(zw) − R(z)R(w) = β²;
    // Q(z) = α z^p/(1−z^k) satisfies (R(z)+R(w))Q(zw) + Q(z)Q(w) = 0
    // when α(2β+α) = 0
    for (alpha, beta, k, p) in [(qi(-1), qr(1, 2), 1i64, 2i64), (qi(-2), qi(1), 2, 0), (qi(0), qi(3), 3, 1)] {
        assert!((alpha.clone() * (beta.clone() + beta.clone() + alpha.clone())).is_zero());
        let (a, b, c) = nib_condition_series(&alpha, &beta, k, p, (-6, 6)).unwrap();
        let report = check_functional_equations(&a, &b, &c, (-6, 6));
        assert!(
            report.passed(),
            "α={alpha} β={beta} k={k} p={p}: {:?}",
            report
                .conditions
                .iter()
                .map(|c| (c.name.clone(), c.residuals.len()))
                .collect::<Vec<_>>()
        );
        assert_eq!(report.conditions[0].gamma, Some(beta.clone() * beta.clone()));
    }
    // violating the constraint breaks the mixed conditions
    let (a, b, c) = nib_condition_series(&qi(1), &qi(1), 1, 1, (-6, 6)).unwrap();
    let report = check_functional_equations(&a, &b, &c, (-6, 6));
    assert!(!report.passed());
}

#[test]
fn nib_operator_jacobi_on_window() {
    // the full four-chain structure defines a rational bracket whose
    // truncated Jacobi defect vanishes on the probe window
    let sig = sig_u();
    let (h, ok) = build_nib(&sig, &qi(-1), &qr(1, 2), 1, 2).unwrap();
    assert!(ok);
    let mut spec = SeriesBracketSpec::new(&sig);
    spec.set_rational(0, 0, h, (-40, 40)).unwrap();
    let report = check_truncated_bracket(&spec, (-3, 3)).unwrap();
    let rat = report.skew_rational.expect("chain given");
    assert!(rat.passed(), "skew: {:?}", rat.failures);
    assert!(
        report.jacobi.passed(),
        "jacobi failures: {:?}",
        report.jacobi.failures
    );
    assert!(report.jacobi.points_checked > 0);
}

#[test]
fn series_restriction_and_display() {
    let s = iota_expand(&odd_rational(), Direction::Plus, -3, 6).unwrap();
    let r = s.restrict(-1, 2);
    assert_eq!(r.class(0), Some(qi(1)));
    assert_eq!(r.class(2), Some(qi(2)));
    assert_eq!(r.class(3), None);
    let shown = format!("{}", s);
    assert!(shown.contains("O(z^7)"));
}
