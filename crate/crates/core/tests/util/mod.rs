//! Shared helpers for the integration tests: deterministic random
//! generators for words, polynomials, tensors and skew bracket specs.

#![allow(dead_code)]

use dmpva::diffop::LaurentTensor;
use dmpva::ncalg::{AlgebraSignature, Generator, NCPoly, Word};
use dmpva::scalar::{qi, Q};
use dmpva::tensor::TensorElem;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use std::collections::BTreeMap;
use std::sync::Arc;

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn random_word(
    rng: &mut StdRng,
    sig: &Arc<AlgebraSignature>,
    max_len: usize,
    shift_range: i64,
) -> Word {
    let len = rng.gen_range(0..=max_len);
    let gens = (0..len)
        .map(|_| {
            Generator::new(
                sig,
                rng.gen_range(0..sig.num_vars()),
                rng.gen_range(-shift_range..=shift_range),
            )
            .unwrap()
        })
        .collect();
    Word(gens)
}

pub fn random_poly(
    rng: &mut StdRng,
    sig: &Arc<AlgebraSignature>,
    terms: usize,
    max_len: usize,
    shift_range: i64,
) -> NCPoly {
    let mut p = NCPoly::zero(sig);
    for _ in 0..terms {
        let w = random_word(rng, sig, max_len, shift_range);
        let c = qi(rng.gen_range(-4..=4));
        p = p.add(&NCPoly::from_terms(sig, [(w, c)])).unwrap();
    }
    p
}

pub fn random_nonzero_poly(
    rng: &mut StdRng,
    sig: &Arc<AlgebraSignature>,
    terms: usize,
    max_len: usize,
    shift_range: i64,
) -> NCPoly {
    loop {
        let p = random_poly(rng, sig, terms, max_len, shift_range);
        if !p.is_zero() {
            return p;
        }
    }
}

pub fn random_tensor(
    rng: &mut StdRng,
    sig: &Arc<AlgebraSignature>,
    arity: usize,
    terms: usize,
    max_len: usize,
    shift_range: i64,
) -> TensorElem {
    let mut t = TensorElem::zero(sig, arity);
    for _ in 0..terms {
        let polys: Vec<NCPoly> = (0..arity)
            .map(|_| {
                NCPoly::from_terms(
                    sig,
                    [(random_word(rng, sig, max_len, shift_range), qi(rng.gen_range(-3..=3)))],
                )
            })
            .collect();
        let refs: Vec<&NCPoly> = polys.iter().collect();
        if polys.iter().all(|p| !p.is_zero()) {
            t = t.add(&TensorElem::from_polys(&refs).unwrap()).unwrap();
        }
    }
    t
}

/// A random skewsymmetric bracket spec: upper entries are random Laurent
/// tensors, diagonals of the exact `f λᴺ − (λS)^{-N} f^σ` shape.
pub fn random_skew_spec(
    rng: &mut StdRng,
    sig: &Arc<AlgebraSignature>,
    max_exp: i64,
) -> dmpva::bracket::BracketSpec {
    let l = sig.num_vars();
    let mut upper: BTreeMap<(usize, usize), LaurentTensor> = BTreeMap::new();
    for i in 0..l {
        for j in i..l {
            let mut lt = LaurentTensor::zero(sig, 2, 1);
            let terms = rng.gen_range(0..=2);
            for _ in 0..terms {
                let n = rng.gen_range(1..=max_exp);
                let f = random_tensor(rng, sig, 2, 1, 2, 1);
                if f.is_zero() {
                    continue;
                }
                if i == j {
                    // f λⁿ − (λS)^{-n} f^σ keeps the diagonal skew
                    lt = lt
                        .add(&LaurentTensor::term(f.clone(), &[n]))
                        .unwrap()
                        .add(&LaurentTensor::term(f.sigma().shift(-n).neg(), &[-n]))
                        .unwrap();
                } else {
                    lt = lt.add(&LaurentTensor::term(f, &[rng.gen_range(-max_exp..=max_exp)])).unwrap();
                }
            }
            upper.insert((i, j), lt);
        }
    }
    dmpva::bracket::BracketSpec::from_upper(sig, &upper).unwrap()
}

/// Nonzero rational from a small palette.
pub fn small_q(rng: &mut StdRng) -> Q {
    qi(*[1i64, -1, 2, 3, -2].get(rng.gen_range(0..5)).unwrap())
}
