//! Randomized structural suite for the tensor operations: `•`
//! associativity and unit, the σ anti-homomorphism, the module-action
//! lemmas on `V⊗3` including the |i−j| = 2 non-commutation counterexample,
//! and strong commutation of the partial derivatives.

mod util;

use dmpva::ncalg::AlgebraSignature;
use dmpva::tensor::{Side, TensorElem};
use util::*;

const CASES: usize = 200;

#[test]
fn bullet_associative_and_unital() {
    let sig = AlgebraSignature::infinite(&["u", "v"]);
    let mut r = rng(21);
    let one = TensorElem::one(&sig, 2);
    for _ in 0..CASES {
        let a = random_tensor(&mut r, &sig, 2, 2, 2, 2);
        let b = random_tensor(&mut r, &sig, 2, 2, 2, 2);
        let c = random_tensor(&mut r, &sig, 2, 2, 2, 2);
        assert_eq!(
            a.bullet(&b).unwrap().bullet(&c).unwrap(),
            a.bullet(&b.bullet(&c).unwrap()).unwrap()
        );
        assert_eq!(one.bullet(&a).unwrap(), a);
        assert_eq!(a.bullet(&one).unwrap(), a);
    }
}

#[test]
fn sigma_antihomomorphism() {
    let sig = AlgebraSignature::infinite(&["u", "v"]);
    let mut r = rng(22);
    for _ in 0..CASES {
        let a = random_tensor(&mut r, &sig, 2, 2, 2, 2);
        let b = random_tensor(&mut r, &sig, 2, 2, 2, 2);
        assert_eq!(
            a.bullet(&b).unwrap().sigma(),
            b.sigma().bullet(&a.sigma()).unwrap()
        );
    }
}

#[test]
fn sigma_has_cycle_order_k() {
    let sig = AlgebraSignature::infinite(&["u", "v"]);
    let mut r = rng(23);
    for arity in 1..=4usize {
        for _ in 0..40 {
            let t = random_tensor(&mut r, &sig, arity, 2, 2, 1);
            assert_eq!(t.sigma_pow(arity), t);
        }
    }
}

#[test]
fn bullet_i_actions_are_associative() {
    // A •ᵢ (B •ᵢ X) = (A•B) •ᵢ X and (X •ᵢ A) •ᵢ B = X •ᵢ (A•B)
    let sig = AlgebraSignature::infinite(&["u", "v"]);
    let mut r = rng(24);
    for _ in 0..CASES {
        let a = random_tensor(&mut r, &sig, 2, 2, 1, 1);
        let b = random_tensor(&mut r, &sig, 2, 2, 1, 1);
        let x = random_tensor(&mut r, &sig, 3, 2, 1, 1);
        for i in 1..=3usize {
            let lhs = TensorElem::bullet_i(&a, &TensorElem::bullet_i(&b, &x, i, Side::Left).unwrap(), i, Side::Left)
                .unwrap();
            let rhs = TensorElem::bullet_i(&a.bullet(&b).unwrap(), &x, i, Side::Left).unwrap();
            assert_eq!(lhs, rhs, "left action i={i}");
            let lhs = TensorElem::bullet_i(
                &b,
                &TensorElem::bullet_i(&a, &x, i, Side::Right).unwrap(),
                i,
                Side::Right,
            )
            .unwrap();
            let rhs = TensorElem::bullet_i(&a.bullet(&b).unwrap(), &x, i, Side::Right).unwrap();
            assert_eq!(lhs, rhs, "right action i={i}");
        }
    }
}

#[test]
fn left_right_actions_commute_when_allowed() {
    // A •ᵢ (X •ⱼ B) = (A •ᵢ X) •ⱼ B for |i−j| ≠ 2
    let sig = AlgebraSignature::infinite(&["u", "v"]);
    let mut r = rng(25);
    for _ in 0..CASES {
        let a = random_tensor(&mut r, &sig, 2, 2, 1, 1);
        let b = random_tensor(&mut r, &sig, 2, 2, 1, 1);
        let x = random_tensor(&mut r, &sig, 3, 2, 1, 1);
        for i in 1..=3usize {
            for j in 1..=3usize {
                if i.abs_diff(j) == 2 {
                    continue;
                }
                let lhs = TensorElem::bullet_i(
                    &a,
                    &TensorElem::bullet_i(&b, &x, j, Side::Right).unwrap(),
                    i,
                    Side::Left,
                )
                .unwrap();
                let rhs = TensorElem::bullet_i(
                    &b,
                    &TensorElem::bullet_i(&a, &x, i, Side::Left).unwrap(),
                    j,
                    Side::Right,
                )
                .unwrap();
                assert_eq!(lhs, rhs, "i={i} j={j}");
            }
        }
    }
}

#[test]
fn left_right_actions_fail_at_distance_two() {
    // the footnote case: a concrete counterexample search for |i−j| = 2
    let sig = AlgebraSignature::infinite(&["u", "v"]);
    let mut r = rng(26);
    let mut found = false;
    for _ in 0..CASES {
        let a = random_tensor(&mut r, &sig, 2, 1, 1, 1);
        let b = random_tensor(&mut r, &sig, 2, 1, 1, 1);
        let x = random_tensor(&mut r, &sig, 3, 1, 1, 1);
        for (i, j) in [(1usize, 3usize), (3, 1)] {
            let lhs = TensorElem::bullet_i(
                &a,
                &TensorElem::bullet_i(&b, &x, j, Side::Right).unwrap(),
                i,
                Side::Left,
            )
            .unwrap();
            let rhs = TensorElem::bullet_i(
                &b,
                &TensorElem::bullet_i(&a, &x, i, Side::Left).unwrap(),
                j,
                Side::Right,
            )
            .unwrap();
            if lhs != rhs {
                found = true;
            }
        }
        if found {
            break;
        }
    }
    assert!(found, "expected a non-commutation witness for |i-j| = 2");
}

#[test]
fn one_three_left_actions_commute() {
    // A •₁ (B •₃ X) = B •₃ (A •₁ X), and the right-action mirror
    let sig = AlgebraSignature::infinite(&["u", "v"]);
    let mut r = rng(27);
    for _ in 0..CASES {
        let a = random_tensor(&mut r, &sig, 2, 2, 1, 1);
        let b = random_tensor(&mut r, &sig, 2, 2, 1, 1);
        let x = random_tensor(&mut r, &sig, 3, 2, 1, 1);
        let lhs = TensorElem::bullet_i(&a, &TensorElem::bullet_i(&b, &x, 3, Side::Left).unwrap(), 1, Side::Left)
            .unwrap();
        let rhs = TensorElem::bullet_i(&b, &TensorElem::bullet_i(&a, &x, 1, Side::Left).unwrap(), 3, Side::Left)
            .unwrap();
        assert_eq!(lhs, rhs);
        let lhs = TensorElem::bullet_i(
            &b,
            &TensorElem::bullet_i(&a, &x, 1, Side::Right).unwrap(),
            3,
            Side::Right,
        )
        .unwrap();
        let rhs = TensorElem::bullet_i(
            &a,
            &TensorElem::bullet_i(&b, &x, 3, Side::Right).unwrap(),
            1,
            Side::Right,
        )
        .unwrap();
        assert_eq!(lhs, rhs);
    }
}

#[test]
fn partials_strongly_commute() {
    // (∂/∂u_{i,m})_L ∂f/∂u_{j,n} = (∂/∂u_{j,n})_R ∂f/∂u_{i,m}
    let sig = AlgebraSignature::infinite(&["u", "v"]);
    let mut r = rng(28);
    for _ in 0..CASES {
        let f = random_poly(&mut r, &sig, 3, 4, 2);
        for (i, m, j, n) in [(0usize, 0i64, 1usize, 1i64), (0, 1, 0, 0), (1, -1, 1, -1)] {
            let lhs = f.partial(j, n).partial_left(i, m).unwrap();
            let rhs = f.partial(i, m).partial_right(j, n).unwrap();
            assert_eq!(lhs, rhs);
        }
    }
}

#[test]
fn mult_is_associativity_probe() {
    // m(σ(a⊗b)) = ba
    let sig = AlgebraSignature::infinite(&["u", "v"]);
    let mut r = rng(29);
    for _ in 0..60 {
        let a = random_poly(&mut r, &sig, 2, 2, 1);
        let b = random_poly(&mut r, &sig, 2, 2, 1);
        if a.is_zero() || b.is_zero() {
            continue;
        }
        let t = TensorElem::from_polys(&[&a, &b]).unwrap();
        assert_eq!(t.sigma().mult(), b.mul(&a).unwrap());
    }
}
