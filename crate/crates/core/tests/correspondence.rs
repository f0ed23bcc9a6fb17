//! The λ-bracket ↔ lattice-bracket correspondence: round trips on random
//! local specs and the four standard fixtures (free one-variable, free
//! symplectic pair, and the two finite-order chains of orders 5 and 4).

mod util;

use dmpva::bracket::*;
use dmpva::diffop::LaurentTensor;
use dmpva::ncalg::{AlgebraSignature, NCPoly};
use dmpva::scalar::qi;
use dmpva::tensor::TensorElem;
use std::collections::BTreeMap;
use util::*;

#[test]
fn round_trip_on_random_specs() {
    let sig = AlgebraSignature::infinite(&["u", "v"]);
    let mut r = rng(31);
    for _ in 0..50 {
        let spec = random_skew_spec(&mut r, &sig, 3);
        let lattice = residue_to_lattice(&spec);
        let back = lattice_to_lambda(&lattice).unwrap();
        assert_eq!(back, spec);
    }
}

#[test]
fn free_one_variable_fixture() {
    // {{u_i λ u_j}} = λ^{j-i}(u_j ⊗ 1 − 1 ⊗ u_j); lattice values
    // {{u_i, u_j}} = δ_ij (u_j⊗1 − 1⊗u_j)
    let sig = AlgebraSignature::infinite(&["u"]);
    let u = NCPoly::gen(&sig, 0, 0).unwrap();
    let one = NCPoly::one(&sig);
    let h = TensorElem::from_polys(&[&u, &one])
        .unwrap()
        .sub(&TensorElem::from_polys(&[&one, &u]).unwrap())
        .unwrap();
    let mut upper = BTreeMap::new();
    upper.insert((0usize, 0usize), LaurentTensor::term(h.clone(), &[0]));
    let spec = BracketSpec::from_upper(&sig, &upper).unwrap();
    let lattice = residue_to_lattice(&spec);
    for (i, j) in [(0i64, 0i64), (2, 2), (1, 4)] {
        let got = lattice.value(0, i, 0, j);
        if i == j {
            assert_eq!(got, h.shift(j));
        } else {
            assert!(got.is_zero());
        }
    }
    // and the λ-bracket on shifted generators reproduces λ^{j-i}(...)
    let got = eval_bracket(&spec, &u.shift(1), &u.shift(4)).unwrap();
    assert_eq!(got.coeff(&[3]), h.shift(4));
}

#[test]
fn free_symplectic_pair_fixture() {
    // {{v λ u}} = 1⊗1 gives lattice {{v_{,i}, u_{,j}}} = δ_ij 1⊗1
    let sig = AlgebraSignature::infinite(&["u", "v"]);
    let mut upper = BTreeMap::new();
    // {{u λ v}} = -|skew of {{v λ u}}: set upper (u, v) from the skew of 1⊗1
    upper.insert(
        (0usize, 1usize),
        skew_partner(&LaurentTensor::unit_term(&sig, 2, &[0])),
    );
    let spec = BracketSpec::from_upper(&sig, &upper).unwrap();
    // {{v λ u}} must be exactly 1⊗1 λ⁰
    assert_eq!(
        spec.gen_bracket(1, 0),
        &LaurentTensor::unit_term(&sig, 2, &[0])
    );
    let lattice = residue_to_lattice(&spec);
    assert_eq!(lattice.value(1, 3, 0, 3), TensorElem::one(&sig, 2));
    assert!(lattice.value(1, 2, 0, 3).is_zero());
    assert!(lattice.value(0, 1, 0, 1).is_zero());
    let back = lattice_to_lambda(&lattice).unwrap();
    assert_eq!(back, spec);
}

#[test]
fn finite_order_five_chain_fixture() {
    // order-5 chain: lattice {{u_i, u_j}} = δ_ij(u_j⊗1 − 1⊗u_j) gives
    // {{u_i λ u_j}} = λ^{[j−i]} (u_j⊗1 − 1⊗u_j) with [·] the residue mod 5
    let e = 5u32;
    let sig = AlgebraSignature::finite(&["u"], e);
    let u = NCPoly::gen(&sig, 0, 0).unwrap();
    let one = NCPoly::one(&sig);
    let h = TensorElem::from_polys(&[&u, &one])
        .unwrap()
        .sub(&TensorElem::from_polys(&[&one, &u]).unwrap())
        .unwrap();
    let lattice = LatticeDPSpec::new(&sig, [((0usize, 0usize, 0i64), h.clone())]).unwrap();
    let spec = lattice_to_lambda(&lattice).unwrap();
    for i in 0..e as i64 {
        for j in 0..e as i64 {
            let got = eval_bracket(&spec, &u.shift(i), &u.shift(j)).unwrap();
            let residue = (j - i).rem_euclid(e as i64);
            let mut want = LaurentTensor::zero(&sig, 2, 1);
            want.add_term(vec![residue], h.shift(j));
            assert_eq!(got, want, "i={i} j={j}");
        }
    }
}

#[test]
fn finite_order_four_pair_fixture() {
    // order-4 automorphism u ↦ v ↦ −u on a symplectic pair:
    // lattice data {{Sⁿv, u}}: n=0 ↦ 1⊗1, n=2 ↦ −1⊗1;
    //              {{Sⁿu, u}}: n=1 ↦ 1⊗1, n=3 ↦ −1⊗1 (same for v,v)
    // giving {{v λ u}} = (1−λ²)(1⊗1) and {{u λ u}} = (λ−λ³)(1⊗1).
    let sig = AlgebraSignature::finite(&["u", "v"], 4);
    let one2 = TensorElem::one(&sig, 2);
    let data = [
        ((1usize, 0usize, 0i64), one2.clone()),
        ((1, 0, 2), one2.neg()),
        ((0, 1, 0), one2.neg()),
        ((0, 1, 2), one2.clone()),
        ((0, 0, 1), one2.clone()),
        ((0, 0, 3), one2.neg()),
        ((1, 1, 1), one2.clone()),
        ((1, 1, 3), one2.neg()),
    ];
    let lattice = LatticeDPSpec::new(&sig, data).unwrap();
    let spec = lattice_to_lambda(&lattice).unwrap();
    let mut vu = LaurentTensor::zero(&sig, 2, 1);
    vu.add_term(vec![0], one2.clone());
    vu.add_term(vec![2], one2.neg());
    assert_eq!(spec.gen_bracket(1, 0), &vu);
    let mut uu = LaurentTensor::zero(&sig, 2, 1);
    uu.add_term(vec![1], one2.clone());
    uu.add_term(vec![3], one2.neg());
    assert_eq!(spec.gen_bracket(0, 0), &uu);
    assert_eq!(spec.gen_bracket(1, 1), &uu);
    // the data is skewsymmetric in the finite-order sense
    assert!(check_skew(&spec).is_ok());
    let back = residue_to_lattice(&spec);
    assert_eq!(back, lattice);
}

#[test]
fn zero_spec_gives_zero_lattice() {
    let sig = AlgebraSignature::infinite(&["u"]);
    let spec = BracketSpec::zero(&sig);
    assert!(residue_to_lattice(&spec).data().is_empty());
}

#[test]
fn finite_mode_lambda_exponents_wrap() {
    // λ-sesquilinearity mod e: {{S⁴u λ u}} = λ^{-4} = λ in e = 5
    let sig = AlgebraSignature::finite(&["u"], 5);
    let u = NCPoly::gen(&sig, 0, 0).unwrap();
    let one = NCPoly::one(&sig);
    let h = TensorElem::from_polys(&[&u, &one])
        .unwrap()
        .sub(&TensorElem::from_polys(&[&one, &u]).unwrap())
        .unwrap();
    let mut upper = BTreeMap::new();
    upper.insert((0usize, 0usize), LaurentTensor::term(h.clone(), &[0]));
    let spec = BracketSpec::from_upper(&sig, &upper).unwrap();
    let got = eval_bracket(&spec, &u.shift(4), &u).unwrap();
    assert_eq!(got.coeff(&[1]), h);
    assert_eq!(qi(1), qi(1));
}
