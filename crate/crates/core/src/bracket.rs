//! The double multiplicative λ-bracket engine.
//!
//! A bracket is specified by its values on generators, collected in the
//! matrix `H` with `H_ij(λ) = {{u_j λ u_i}}`. Evaluation on arbitrary
//! difference polynomials goes through the Master Formula
//!
//! `{{f λ g}} = Σ ∂g/∂u_{j,n} • λⁿSⁿ {{u_i λx u_j}} λ^{-m}S^{-m} • (|_{x=S} ∂f/∂u_{i,m})^σ`,
//!
//! which expands coefficientwise to
//! `Σ λ^{n+p-m} (∂g/∂u_{j,n}) • Sⁿ(h_p) • S^{n+p-m}((∂f/∂u_{i,m})^σ)`
//! where `{{u_i λ u_j}} = Σ_p h_p λ^p`.
//!
//! Skewsymmetry is decided exactly as skew-adjointness of `H`, and the
//! Jacobi identity through the triple bracket on generator triples.

use crate::diffop::{DiffOpMatrix, LaurentTensor};
use crate::error::AlgebraError;
use crate::ncalg::{AlgebraSignature, NCPoly, Word};
use crate::scalar::Q;
use crate::tensor::{InsertMode, TensorElem};
use num::Zero;
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

/// A double multiplicative λ-bracket given on generators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BracketSpec {
    sig: Arc<AlgebraSignature>,
    h: DiffOpMatrix,
}

impl BracketSpec {
    /// Builds a spec from the operator matrix `H` with
    /// `H_ij(λ) = {{u_j λ u_i}}`.
    pub fn new(sig: &Arc<AlgebraSignature>, h: DiffOpMatrix) -> Result<Self, AlgebraError> {
        if h.signature() != sig {
            return Err(AlgebraError::SignatureMismatch);
        }
        if h.size() != sig.num_vars() {
            return Err(AlgebraError::SizeMismatch { left: h.size(), right: sig.num_vars() });
        }
        Ok(BracketSpec { sig: Arc::clone(sig), h })
    }

    pub fn zero(sig: &Arc<AlgebraSignature>) -> Self {
        BracketSpec { sig: Arc::clone(sig), h: DiffOpMatrix::zero(sig, sig.num_vars()) }
    }

    /// Builds a spec from the generator brackets `{{u_i λ u_j}}` for
    /// `i ≤ j`, completing the lower half by skewsymmetry:
    /// `{{u_j λ u_i}} = -Σ_p λ^{-p} S^{-p}(h_p^σ)`.
    pub fn from_upper(
        sig: &Arc<AlgebraSignature>,
        upper: &BTreeMap<(usize, usize), LaurentTensor>,
    ) -> Result<Self, AlgebraError> {
        let l = sig.num_vars();
        let mut h = DiffOpMatrix::zero(sig, l);
        for (&(i, j), lt) in upper {
            if i > j || j >= l {
                return Err(AlgebraError::VarOutOfRange(j.max(i)));
            }
            // {{u_i λ u_j}} sits at H[j][i]
            h.set_entry(j, i, lt.clone());
            if i != j {
                h.set_entry(i, j, skew_partner(lt));
            }
        }
        BracketSpec::new(sig, h)
    }

    pub fn signature(&self) -> &Arc<AlgebraSignature> {
        &self.sig
    }

    pub fn matrix(&self) -> &DiffOpMatrix {
        &self.h
    }

    /// `{{u_i λ u_j}}`.
    pub fn gen_bracket(&self, i: usize, j: usize) -> &LaurentTensor {
        self.h.entry(j, i)
    }

    pub fn num_vars(&self) -> usize {
        self.sig.num_vars()
    }
}

/// `-Σ_p λ^{-p} S^{-p}(h_p^σ)` — the skewsymmetry image of a generator
/// bracket.
pub fn skew_partner(lt: &LaurentTensor) -> LaurentTensor {
    let mut out = LaurentTensor::zero(lt.signature(), 2, 1);
    for (e, t) in lt.terms() {
        let p = e[0];
        out.add_term(vec![-p], t.sigma().shift(-p).neg());
    }
    out
}

/// Master Formula evaluation of `{{f λ g}}`; one formal variable (λ).
pub fn eval_bracket(
    spec: &BracketSpec,
    f: &NCPoly,
    g: &NCPoly,
) -> Result<LaurentTensor, AlgebraError> {
    if f.signature() != &spec.sig || g.signature() != &spec.sig {
        return Err(AlgebraError::SignatureMismatch);
    }
    let mut out = LaurentTensor::zero(&spec.sig, 2, 1);
    let f_sup = f.support();
    let g_sup = g.support();
    for &(j, n) in &g_sup {
        let dg = g.partial(j, n);
        if dg.is_zero() {
            continue;
        }
        for &(i, m) in &f_sup {
            let df_sigma = f.partial(i, m).sigma();
            if df_sigma.is_zero() {
                continue;
            }
            let h_ij = spec.gen_bracket(i, j);
            for (e, h_p) in h_ij.terms() {
                let p = e[0];
                let exp = n + p - m;
                let coeff = dg.bullet(&h_p.shift(n))?.bullet(&df_sigma.shift(exp))?;
                out.add_term(vec![exp], coeff);
            }
        }
    }
    Ok(out)
}

fn word_poly(sig: &Arc<AlgebraSignature>, w: &Word) -> NCPoly {
    NCPoly::from_terms(sig, [(w.clone(), num::One::one())])
}

/// Embeds a one-variable Laurent tensor into an `out_nvars`-variable space,
/// its variable landing at `position`.
fn promote(lt: &LaurentTensor, out_nvars: usize, position: usize) -> LaurentTensor {
    let mut out = LaurentTensor::zero(lt.signature(), lt.arity(), out_nvars);
    for (e, t) in lt.terms() {
        let mut exps = vec![0i64; out_nvars];
        exps[position] = e[0];
        out.add_term(exps, t.clone());
    }
    out
}

/// `{{a λ B}}_L = {{a λ B'}} ⊗ B''` for a Laurent tensor `B` of arity 2;
/// the λ of the inner bracket lands on `bracket_var`.
fn dgal_left(
    spec: &BracketSpec,
    a: &NCPoly,
    b: &LaurentTensor,
    bracket_var: usize,
) -> Result<LaurentTensor, AlgebraError> {
    let mut out = LaurentTensor::zero(&spec.sig, 3, b.nvars());
    let mut cache: BTreeMap<Word, LaurentTensor> = BTreeMap::new();
    for (e, t) in b.terms() {
        for (key, c) in t.terms() {
            let (w1, w2) = (&key[0], &key[1]);
            let inner = cache
                .entry(w1.clone())
                .or_insert_with(|| eval_bracket(spec, a, &word_poly(&spec.sig, w1)).unwrap())
                .clone();
            let w2_poly = word_poly(&spec.sig, w2);
            for (ie, it) in inner.terms() {
                let mut exps = e.clone();
                exps[bracket_var] += ie[0];
                // append w2 as the last factor
                let coeff = it.insert(0, &w2_poly, InsertMode::TensorRight)?.scale(c);
                out.add_term(exps, coeff);
            }
        }
    }
    Ok(out)
}

/// `{{a λ B}}_R = B' ⊗ {{a λ B''}}`.
fn dgal_right(
    spec: &BracketSpec,
    a: &NCPoly,
    b: &LaurentTensor,
    bracket_var: usize,
) -> Result<LaurentTensor, AlgebraError> {
    let mut out = LaurentTensor::zero(&spec.sig, 3, b.nvars());
    let mut cache: BTreeMap<Word, LaurentTensor> = BTreeMap::new();
    for (e, t) in b.terms() {
        for (key, c) in t.terms() {
            let (w1, w2) = (&key[0], &key[1]);
            let inner = cache
                .entry(w2.clone())
                .or_insert_with(|| eval_bracket(spec, a, &word_poly(&spec.sig, w2)).unwrap())
                .clone();
            let w1_poly = word_poly(&spec.sig, w1);
            for (ie, it) in inner.terms() {
                let mut exps = e.clone();
                exps[bracket_var] += ie[0];
                // prepend w1 as the first factor
                let coeff = it.insert(0, &w1_poly, InsertMode::TensorLeft)?.scale(c);
                out.add_term(exps, coeff);
            }
        }
    }
    Ok(out)
}

/// `{{A_{V·x} c}}_L = {{A' _{V·x} c}} ⊗₁ (|_{x=S} A'')`: the inner bracket
/// variable is substituted by the monomial with exponents `vexp` in the
/// output variables, and its power `r` applies `S^r` to the spliced factor.
fn dgal_tensor_left(
    spec: &BracketSpec,
    a: &LaurentTensor,
    c: &NCPoly,
    vexp: &[i64],
) -> Result<LaurentTensor, AlgebraError> {
    let mut out = LaurentTensor::zero(&spec.sig, 3, a.nvars());
    let mut cache: BTreeMap<Word, LaurentTensor> = BTreeMap::new();
    for (e, t) in a.terms() {
        for (key, coeff) in t.terms() {
            let (w1, w2) = (&key[0], &key[1]);
            let inner = cache
                .entry(w1.clone())
                .or_insert_with(|| eval_bracket(spec, &word_poly(&spec.sig, w1), c).unwrap())
                .clone();
            for (ie, it) in inner.terms() {
                let r = ie[0];
                let mut exps = e.clone();
                for (v, &wt) in vexp.iter().enumerate() {
                    exps[v] += r * wt;
                }
                let spliced = it
                    .insert(
                        1,
                        &word_poly(&spec.sig, &w2.shifted(&spec.sig, r)),
                        InsertMode::TensorLeft,
                    )?
                    .scale(coeff);
                out.add_term(exps, spliced);
            }
        }
    }
    Ok(out)
}

/// The triple bracket
/// `{{a λ b μ c}} = {{a λ {{b μ c}}}}_L − {{b μ {{a λ c}}}}_R − {{{{a λ b}}_{λμ} c}}_L`,
/// valued in `V⊗3[λ^{±1}, μ^{±1}]` (variables in that order). It vanishes
/// identically exactly when the Jacobi identity holds on `(a, b, c)`.
pub fn triple_bracket(
    spec: &BracketSpec,
    a: &NCPoly,
    b: &NCPoly,
    c: &NCPoly,
) -> Result<LaurentTensor, AlgebraError> {
    let b_mu_c = promote(&eval_bracket(spec, b, c)?, 2, 1);
    let term1 = dgal_left(spec, a, &b_mu_c, 0)?;
    let a_la_c = promote(&eval_bracket(spec, a, c)?, 2, 0);
    let term2 = dgal_right(spec, b, &a_la_c, 1)?;
    let a_la_b = promote(&eval_bracket(spec, a, b)?, 2, 0);
    let term3 = dgal_tensor_left(spec, &a_la_b, c, &[1, 1])?;
    term1.sub(&term2)?.sub(&term3)
}

/// `{{A_{λμ} c}}_L` for an explicit 2-variable Laurent tensor `A`
/// (used by the Lemma-style identities in tests).
pub fn bracket_tensor_left_lm(
    spec: &BracketSpec,
    a: &LaurentTensor,
    c: &NCPoly,
) -> Result<LaurentTensor, AlgebraError> {
    dgal_tensor_left(spec, a, c, &[1, 1])
}

/// Skewsymmetry on generators: true iff `H* = -H`; on failure the first
/// failing entry `(i, j)` with the defect `(H* + H)_{ij}`.
pub fn check_skew(spec: &BracketSpec) -> Result<(), (usize, usize, LaurentTensor)> {
    match spec.h.skew_witness() {
        None => Ok(()),
        Some(w) => Err(w),
    }
}

/// One failing generator triple of the Jacobi identity.
#[derive(Debug, Clone)]
pub struct JacobiFailure {
    pub triple: (usize, usize, usize),
    pub defect: LaurentTensor,
}

/// Jacobi report: all failing generator triples, sorted by `(i, j, k)`.
#[derive(Debug, Clone)]
pub struct JacobiReport {
    pub failures: Vec<JacobiFailure>,
}

impl JacobiReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Evaluates the triple bracket on all generator triples (shift 0);
/// requires a skewsymmetric spec, since the reduction to generators uses
/// skewsymmetry. Triples are checked in parallel and the report is merged
/// in sorted order.
pub fn check_jacobi(spec: &BracketSpec) -> Result<JacobiReport, AlgebraError> {
    if check_skew(spec).is_err() {
        return Err(AlgebraError::SkewRequired);
    }
    Ok(check_jacobi_unchecked(spec))
}

/// Same as [`check_jacobi`] without the skew precondition (used by the
/// classification oracles where skewness holds by construction).
pub fn check_jacobi_unchecked(spec: &BracketSpec) -> JacobiReport {
    let l = spec.num_vars();
    let mut triples = Vec::with_capacity(l * l * l);
    for i in 0..l {
        for j in 0..l {
            for k in 0..l {
                triples.push((i, j, k));
            }
        }
    }
    let failures: Vec<JacobiFailure> = triples
        .par_iter()
        .filter_map(|&(i, j, k)| {
            let a = NCPoly::gen(&spec.sig, i, 0).unwrap();
            let b = NCPoly::gen(&spec.sig, j, 0).unwrap();
            let c = NCPoly::gen(&spec.sig, k, 0).unwrap();
            let defect = triple_bracket(spec, &a, &b, &c).unwrap();
            if defect.is_zero() {
                None
            } else {
                Some(JacobiFailure { triple: (i, j, k), defect })
            }
        })
        .collect();
    JacobiReport { failures }
}

/// A local lattice double Poisson bracket on generators:
/// `(i, j, n) ↦ {{Sⁿ(u_i), u_j}}`, finitely supported in `n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeDPSpec {
    sig: Arc<AlgebraSignature>,
    data: BTreeMap<(usize, usize, i64), TensorElem>,
}

impl LatticeDPSpec {
    pub fn new(
        sig: &Arc<AlgebraSignature>,
        data: impl IntoIterator<Item = ((usize, usize, i64), TensorElem)>,
    ) -> Result<Self, AlgebraError> {
        let mut map = BTreeMap::new();
        for ((i, j, n), t) in data {
            if i >= sig.num_vars() || j >= sig.num_vars() {
                return Err(AlgebraError::VarOutOfRange(i.max(j)));
            }
            if t.is_zero() {
                continue;
            }
            if t.arity() != 2 {
                return Err(AlgebraError::ArityMismatch { expected: 2, found: t.arity() });
            }
            map.insert((i, j, sig.reduce_shift(n)), t);
        }
        Ok(LatticeDPSpec { sig: Arc::clone(sig), data: map })
    }

    pub fn signature(&self) -> &Arc<AlgebraSignature> {
        &self.sig
    }

    pub fn data(&self) -> &BTreeMap<(usize, usize, i64), TensorElem> {
        &self.data
    }

    /// `{{S^a(u_i), S^b(u_j)}} = S^b {{S^{a-b}(u_i), u_j}}`.
    pub fn value(&self, i: usize, a: i64, j: usize, b: i64) -> TensorElem {
        let n = self.sig.reduce_shift(a - b);
        match self.data.get(&(i, j, n)) {
            Some(t) => t.shift(b),
            None => TensorElem::zero(&self.sig, 2),
        }
    }
}

/// Reads the lattice double bracket off a λ-bracket:
/// `{{Sⁿ(u_i), u_j}}` is the λⁿ coefficient of `{{u_i λ u_j}}`.
pub fn residue_to_lattice(spec: &BracketSpec) -> LatticeDPSpec {
    let l = spec.num_vars();
    let mut data = BTreeMap::new();
    for i in 0..l {
        for j in 0..l {
            for (e, t) in spec.gen_bracket(i, j).terms() {
                data.insert((i, j, e[0]), t.clone());
            }
        }
    }
    LatticeDPSpec { sig: Arc::clone(&spec.sig), data }
}

/// `{{u_i λ u_j}} = Σₙ λⁿ {{Sⁿ(u_i), u_j}}` — inverse of
/// [`residue_to_lattice`] on generator data.
pub fn lattice_to_lambda(ldp: &LatticeDPSpec) -> Result<BracketSpec, AlgebraError> {
    let sig = &ldp.sig;
    let l = sig.num_vars();
    let mut h = DiffOpMatrix::zero(sig, l);
    for (&(i, j, n), t) in &ldp.data {
        let mut entry = h.entry(j, i).clone();
        entry.add_term(vec![n], t.clone());
        h.set_entry(j, i, entry);
    }
    BracketSpec::new(sig, h)
}

/// Decides whether `f = g • S^N g` with `g = (αu+β)⊗(αu+β)` for some
/// scalars α, β (over the algebraic closure; the conditions are exact
/// rational coefficient relations, see below). Requires a one-variable
/// signature and `N ≥ 1`.
///
/// Writing `A = α²`, `B = αβ`, `C = β²`, the product expands to
/// `f = (A·u u_N + B·u + B·u_N + C) ⊗ (A·u_N u + B·u_N + B·u + C)`, so `f`
/// determines the ratios `b = B/A`, `c = C/A` rationally whenever `A ≠ 0`,
/// and existence of (α, β) is equivalent to `c = b²` together with all 16
/// coefficient products matching. `A = 0` forces `f` constant.
pub fn check_class_r1(f: &TensorElem, n: i64) -> Result<bool, AlgebraError> {
    let sig = f.signature();
    if sig.num_vars() != 1 {
        return Err(AlgebraError::VarOutOfRange(1));
    }
    if n < 1 {
        return Err(AlgebraError::InvalidBlockLength(n));
    }
    if f.arity() != 2 {
        return Err(AlgebraError::ArityMismatch { expected: 2, found: f.arity() });
    }
    if f.is_zero() {
        return Ok(true);
    }
    let g0 = crate::ncalg::Generator::new(sig, 0, 0)?;
    let gn = crate::ncalg::Generator::new(sig, 0, n)?;
    let one = Word::one();
    let w_u = Word::letter(g0);
    let w_un = Word::letter(gn);
    let w_uun = Word(vec![g0, gn]);
    let w_unu = Word(vec![gn, g0]);
    let left_basis = [w_uun.clone(), w_u.clone(), w_un.clone(), one.clone()];
    let right_basis = [w_unu.clone(), w_un.clone(), w_u.clone(), one.clone()];
    // support must stay inside the 4x4 block
    for (key, _) in f.terms() {
        if !left_basis.contains(&key[0]) || !right_basis.contains(&key[1]) {
            return Ok(false);
        }
    }
    let f_at = |l: &Word, r: &Word| f.coeff(&[l.clone(), r.clone()]);
    let f1 = f_at(&w_uun, &w_unu); // = A²
    if f1.is_zero() {
        // α = 0 forces f = C²·(1⊗1)
        return Ok(f.terms().all(|(key, _)| key[0] == one && key[1] == one));
    }
    let b = f_at(&w_uun, &w_un) / f1.clone(); // = B/A
    let c = f_at(&w_uun, &one) / f1.clone(); // = C/A
    if b.clone() * b.clone() != c {
        return Ok(false);
    }
    let weights = |w: &Word, basis: &[Word; 4]| -> Q {
        let idx = basis.iter().position(|x| x == w).unwrap();
        match idx {
            0 => num::One::one(),
            1 | 2 => b.clone(),
            _ => c.clone(),
        }
    };
    for wl in &left_basis {
        for wr in &right_basis {
            let expect = f1.clone() * weights(wl, &left_basis) * weights(wr, &right_basis);
            if f_at(wl, wr) != expect {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Coefficients of a two-variable quadratic-family bracket
/// `{{u λ v}} = Σ_k λ^k Σ K^k_{abcd} v^a u_k^b ⊗ u_k^c v^d`.
pub type R2Coeffs = BTreeMap<(i64, u8, u8, u8, u8), Q>;

/// Evaluates the quadratic classification conditions for the two-variable
/// family exactly. Returns the sorted list of violated conditions.
pub fn check_class_r2(k: &R2Coeffs) -> (bool, Vec<String>) {
    let get = |kk: i64, a: u8, b: u8, c: u8, d: u8| -> Q {
        k.get(&(kk, a, b, c, d)).cloned().unwrap_or_else(Q::zero)
    };
    let mut violations = Vec::new();
    let supports: Vec<i64> = {
        let mut s: Vec<i64> = k
            .iter()
            .filter(|(_, v)| !v.is_zero())
            .map(|(&(kk, ..), _)| kk)
            .collect();
        s.sort_unstable();
        s.dedup();
        s
    };
    let bits = [0u8, 1u8];
    // cross conditions for distinct k, l
    for &kk in &supports {
        for &ll in &supports {
            if kk == ll {
                continue;
            }
            for &a in &bits {
                for &b in &bits {
                    for &c in &bits {
                        for &d in &bits {
                            for &a2 in &bits {
                                for &b2 in &bits {
                                    for &c2 in &bits {
                                        for &d2 in &bits {
                                            if get(kk, 1, b, c, d) * get(ll, a2, b2, c2, 0)
                                                != get(kk, 0, b, c, d) * get(ll, a2, b2, c2, 1)
                                            {
                                                violations.push(format!(
                                                    "cross-v k={kk} l={ll} bcd={b}{c}{d} a'b'c'={a2}{b2}{c2}"
                                                ));
                                            }
                                            if get(kk, a, b, 1, d) * get(ll, a2, 0, c2, d2)
                                                != get(kk, a, b, 0, d) * get(ll, a2, 1, c2, d2)
                                            {
                                                violations.push(format!(
                                                    "cross-u k={kk} l={ll} abd={a}{b}{d} a'c'd'={a2}{c2}{d2}"
                                                ));
                                            }
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    // per-k conditions
    for &kk in &supports {
        for &a in &bits {
            for &b in &bits {
                for &c in &bits {
                    for &d in &bits {
                        for &eps in &bits {
                            if get(kk, a, b, 1, eps) * get(kk, eps, 0, c, d)
                                != get(kk, a, b, 0, eps) * get(kk, eps, 1, c, d)
                            {
                                violations
                                    .push(format!("d1 k={kk} abcd={a}{b}{c}{d} eps={eps}"));
                            }
                            if get(kk, a, b, eps, 0) * get(kk, 1, eps, c, d)
                                != get(kk, a, b, eps, 1) * get(kk, 0, eps, c, d)
                            {
                                violations
                                    .push(format!("c1 k={kk} abcd={a}{b}{c}{d} eps={eps}"));
                            }
                        }
                        if get(kk, a, b, 1, 0) * get(kk, 1, 0, c, d)
                            != get(kk, a, b, 0, 1) * get(kk, 0, 1, c, d)
                        {
                            violations.push(format!("d2 k={kk} abcd={a}{b}{c}{d}"));
                        }
                        if get(kk, a, b, 0, 0) * get(kk, 1, 1, c, d)
                            != get(kk, a, b, 1, 1) * get(kk, 0, 0, c, d)
                        {
                            violations.push(format!("c2 k={kk} abcd={a}{b}{c}{d}"));
                        }
                    }
                }
            }
        }
    }
    violations.sort();
    violations.dedup();
    (violations.is_empty(), violations)
}

/// Builds the two-variable spec `{{u λ u}} = {{v λ v}} = 0`,
/// `{{u λ v}} = Σ_k λ^k Σ K^k_{abcd} v^a u_k^b ⊗ u_k^c v^d`, with
/// `{{v λ u}}` filled in by skewsymmetry. Variables: 0 = u, 1 = v.
pub fn spec_from_r2_coeffs(
    sig: &Arc<AlgebraSignature>,
    k: &R2Coeffs,
) -> Result<BracketSpec, AlgebraError> {
    if sig.num_vars() != 2 {
        return Err(AlgebraError::VarOutOfRange(2));
    }
    let u = NCPoly::gen(sig, 0, 0)?;
    let v = NCPoly::gen(sig, 1, 0)?;
    let one = NCPoly::one(sig);
    let mut uv = LaurentTensor::zero(sig, 2, 1);
    for (&(kk, a, b, c, d), coeff) in k {
        if coeff.is_zero() {
            continue;
        }
        let uk = u.shift(kk);
        let pick = |e: u8, p: &NCPoly| if e == 1 { p.clone() } else { one.clone() };
        let left = pick(a, &v).mul(&pick(b, &uk))?;
        let right = pick(c, &uk).mul(&pick(d, &v))?;
        let t = TensorElem::from_polys(&[&left, &right])?.scale(coeff);
        uv.add_term(vec![kk], t);
    }
    let mut upper = BTreeMap::new();
    upper.insert((0usize, 1usize), uv);
    BracketSpec::from_upper(sig, &upper)
}

/// Sums all Laurent coefficients: the λ = μ = … = 1 specialisation.
pub fn specialize_ones(lt: &LaurentTensor) -> TensorElem {
    let mut acc = TensorElem::zero(lt.signature(), lt.arity());
    for (_, t) in lt.terms() {
        acc = acc.add(t).expect("uniform arity");
    }
    acc
}

/// λ-bracket collapsed by the multiplication map:
/// `{f λ g} = m {{f λ g}}`, an arity-1 Laurent tensor.
pub fn mult_bracket(
    spec: &BracketSpec,
    f: &NCPoly,
    g: &NCPoly,
) -> Result<LaurentTensor, AlgebraError> {
    let full = eval_bracket(spec, f, g)?;
    Ok(full.map_coeffs_arity(1, |t| {
        TensorElem::from_polys(&[&t.mult()]).expect("arity 1")
    }))
}

impl fmt::Display for BracketSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let l = self.num_vars();
        for i in 0..l {
            for j in 0..l {
                writeln!(
                    f,
                    "{{{{{} λ {}}}}} = {}",
                    self.sig.name(i),
                    self.sig.name(j),
                    self.gen_bracket(i, j)
                )?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{qi, qr};

    fn sig_u() -> Arc<AlgebraSignature> {
        AlgebraSignature::infinite(&["u"])
    }

    fn u(sig: &Arc<AlgebraSignature>, n: i64) -> NCPoly {
        NCPoly::gen(sig, 0, n).unwrap()
    }

    fn t2(a: &NCPoly, b: &NCPoly) -> TensorElem {
        TensorElem::from_polys(&[a, b]).unwrap()
    }

    /// The `{{u λ u}} = u⊗1 − 1⊗u` spec (one variable, λ⁰ coefficient).
    fn free_a_spec() -> BracketSpec {
        let sig = sig_u();
        let one = NCPoly::one(&sig);
        let h0 = t2(&u(&sig, 0), &one).sub(&t2(&one, &u(&sig, 0))).unwrap();
        let mut upper = BTreeMap::new();
        upper.insert((0usize, 0usize), LaurentTensor::term(h0, &[0]));
        BracketSpec::from_upper(&sig, &upper).unwrap()
    }

    #[test]
    fn eval_left_leibniz_on_square() {
        // {{u λ u²}} = u²⊗1 − 1⊗u², all at λ⁰
        let spec = free_a_spec();
        let sig = spec.signature().clone();
        let one = NCPoly::one(&sig);
        let got = eval_bracket(&spec, &u(&sig, 0), &u(&sig, 0).pow(2)).unwrap();
        let expect = t2(&u(&sig, 0).pow(2), &one)
            .sub(&t2(&one, &u(&sig, 0).pow(2)))
            .unwrap();
        assert_eq!(got.coeff(&[0]), expect);
        assert_eq!(got.exponent_range(0), Some((0, 0)));
    }

    #[test]
    fn eval_right_leibniz_on_square() {
        // {{u² λ u}} = u²⊗1 − 1⊗u² as well (hand-applied right Leibniz rule)
        let spec = free_a_spec();
        let sig = spec.signature().clone();
        let one = NCPoly::one(&sig);
        let got = eval_bracket(&spec, &u(&sig, 0).pow(2), &u(&sig, 0)).unwrap();
        let expect = t2(&u(&sig, 0).pow(2), &one)
            .sub(&t2(&one, &u(&sig, 0).pow(2)))
            .unwrap();
        assert_eq!(got.coeff(&[0]), expect);
    }

    #[test]
    fn eval_shifted_generators() {
        // {{u_i λ u_j}} = λ^{j-i} (u_j⊗1 − 1⊗u_j)
        let spec = free_a_spec();
        let sig = spec.signature().clone();
        let one = NCPoly::one(&sig);
        for (i, j) in [(0i64, 0i64), (2, 5), (-1, 3), (4, 1)] {
            let got = eval_bracket(&spec, &u(&sig, i), &u(&sig, j)).unwrap();
            let expect = t2(&u(&sig, j), &one).sub(&t2(&one, &u(&sig, j))).unwrap();
            assert_eq!(got.coeff(&[j - i]), expect);
            assert_eq!(got.exponent_range(0), Some((j - i, j - i)));
        }
    }

    #[test]
    fn eval_unit_gives_zero() {
        let spec = free_a_spec();
        let sig = spec.signature().clone();
        let one = NCPoly::one(&sig);
        let p = u(&sig, 0).pow(2).add(&u(&sig, 3)).unwrap();
        assert!(eval_bracket(&spec, &one, &p).unwrap().is_zero());
        assert!(eval_bracket(&spec, &p, &one).unwrap().is_zero());
    }

    #[test]
    fn sesquilinearity() {
        let spec = free_a_spec();
        let sig = spec.signature().clone();
        let f = u(&sig, 0).mul(&u(&sig, 1)).unwrap();
        let g = u(&sig, 2).pow(2);
        let base = eval_bracket(&spec, &f, &g).unwrap();
        // {{S(f) λ g}} = λ^{-1} {{f λ g}}
        let left = eval_bracket(&spec, &f.shift(1), &g).unwrap();
        assert_eq!(left, base.mul_var_pow(0, -1));
        // {{f λ S(g)}} = λ S({{f λ g}})
        let right = eval_bracket(&spec, &f, &g.shift(1)).unwrap();
        assert_eq!(right, base.shift_coeffs(1).mul_var_pow(0, 1));
    }

    #[test]
    fn skew_checks() {
        // f λ^N − (λS)^{-N} f^σ is skew for any f
        let sig = sig_u();
        let f = t2(&u(&sig, 0).mul(&u(&sig, 1)).unwrap(), &u(&sig, 2));
        let lt = LaurentTensor::term(f.clone(), &[2])
            .add(&LaurentTensor::term(f.sigma().shift(-2).neg(), &[-2]))
            .unwrap();
        let mut upper = BTreeMap::new();
        upper.insert((0usize, 0usize), lt);
        let spec = BracketSpec::from_upper(&sig, &upper).unwrap();
        assert!(check_skew(&spec).is_ok());
        // (1⊗1)λ alone fails
        let mut upper = BTreeMap::new();
        upper.insert((0usize, 0usize), LaurentTensor::unit_term(&sig, 2, &[1]));
        let spec = BracketSpec::from_upper(&sig, &upper).unwrap();
        assert!(check_skew(&spec).is_err());
        // zero bracket passes
        assert!(check_skew(&BracketSpec::zero(&sig)).is_ok());
    }

    #[test]
    fn jacobi_positive_case_class1() {
        // N = 1, f = (u⊗u) • S(u⊗u): {{u λ u}} = fλ − (λS)^{-1}f^σ passes
        let sig = sig_u();
        let g = t2(&u(&sig, 0), &u(&sig, 0));
        let f = g.bullet(&g.shift(1)).unwrap();
        let lt = LaurentTensor::term(f.clone(), &[1])
            .add(&LaurentTensor::term(f.sigma().shift(-1).neg(), &[-1]))
            .unwrap();
        let mut upper = BTreeMap::new();
        upper.insert((0usize, 0usize), lt);
        let spec = BracketSpec::from_upper(&sig, &upper).unwrap();
        let t = triple_bracket(&spec, &u(&sig, 0), &u(&sig, 0), &u(&sig, 0)).unwrap();
        assert!(t.is_zero());
        assert!(check_jacobi(&spec).unwrap().passed());
    }

    #[test]
    fn jacobi_fails_off_classification() {
        // f = u*u1 ⊗ 1 is not of the g•S^Ng form and must fail
        let sig = sig_u();
        let one = NCPoly::one(&sig);
        let f = t2(&u(&sig, 0).mul(&u(&sig, 1)).unwrap(), &one);
        let lt = LaurentTensor::term(f.clone(), &[1])
            .add(&LaurentTensor::term(f.sigma().shift(-1).neg(), &[-1]))
            .unwrap();
        let mut upper = BTreeMap::new();
        upper.insert((0usize, 0usize), lt);
        let spec = BracketSpec::from_upper(&sig, &upper).unwrap();
        let report = check_jacobi(&spec).unwrap();
        assert!(!report.passed());
        assert!(!check_class_r1(&f, 1).unwrap());
    }

    #[test]
    fn triple_kills_unit() {
        let spec = free_a_spec();
        let sig = spec.signature().clone();
        let one = NCPoly::one(&sig);
        let t =
            triple_bracket(&spec, &u(&sig, 0), &u(&sig, 1), &one).unwrap();
        assert!(t.is_zero());
    }

    #[test]
    fn lattice_round_trip_free_a() {
        let spec = free_a_spec();
        let sig = spec.signature().clone();
        let one = NCPoly::one(&sig);
        let lattice = residue_to_lattice(&spec);
        // {{u_i, u_j}} = δ_ij (u_j⊗1 − 1⊗u_j)
        let same = lattice.value(0, 3, 0, 3);
        let expect = t2(&u(&sig, 3), &one).sub(&t2(&one, &u(&sig, 3))).unwrap();
        assert_eq!(same, expect);
        let back = lattice_to_lambda(&lattice).unwrap();
        assert_eq!(back, spec);
    }

    #[test]
    fn zero_spec_round_trip() {
        let spec = BracketSpec::zero(&sig_u());
        let lattice = residue_to_lattice(&spec);
        assert!(lattice.data().is_empty());
        assert_eq!(lattice_to_lambda(&lattice).unwrap(), spec);
    }

    #[test]
    fn class_r1_examples() {
        let sig = sig_u();
        let one = NCPoly::one(&sig);
        // f = u u1 ⊗ u1 u (α=1, β=0) → true
        let g = t2(&u(&sig, 0), &u(&sig, 0));
        let f = g.bullet(&g.shift(1)).unwrap();
        assert!(check_class_r1(&f, 1).unwrap());
        // f = u u1 ⊗ 1 → false
        let f = t2(&u(&sig, 0).mul(&u(&sig, 1)).unwrap(), &one);
        assert!(!check_class_r1(&f, 1).unwrap());
        // f = 1⊗1 → true (α=0, β=1)
        assert!(check_class_r1(&TensorElem::one(&sig, 2), 1).unwrap());
        // full generic (α, β) = (2, -3), N = 2
        let au_b = u(&sig, 0).scale(&qi(2)).add(&NCPoly::constant(&sig, qi(-3))).unwrap();
        let g = t2(&au_b, &au_b);
        let f = g.bullet(&g.shift(2)).unwrap();
        assert!(check_class_r1(&f, 2).unwrap());
        // perturb one coefficient → false
        let mut bad = f.clone();
        bad.add_term(vec![Word::one(), Word::one()], qr(1, 7));
        assert!(!check_class_r1(&bad, 2).unwrap());
    }

    #[test]
    fn class_r2_examples() {
        // Quadratic family: K_1010 = K_0101 = 1, K_1001 = α, K_0110 = 1/α
        let mut k: R2Coeffs = BTreeMap::new();
        let alpha = qr(3, 2);
        k.insert((1, 1, 0, 1, 0), qi(1));
        k.insert((1, 0, 1, 0, 1), qi(1));
        k.insert((1, 1, 0, 0, 1), alpha.clone());
        k.insert((1, 0, 1, 1, 0), alpha.recip());
        let (ok, _) = check_class_r2(&k);
        assert!(ok);
        // single K_1111 = 1 passes
        let mut k: R2Coeffs = BTreeMap::new();
        k.insert((2, 1, 1, 1, 1), qi(1));
        assert!(check_class_r2(&k).0);
        // K_1010 = 1, K_0101 = 2 violates the square relation
        let mut k: R2Coeffs = BTreeMap::new();
        k.insert((0, 1, 0, 1, 0), qi(1));
        k.insert((0, 0, 1, 0, 1), qi(2));
        let (ok, viol) = check_class_r2(&k);
        assert!(!ok);
        assert!(viol.iter().any(|v| v.starts_with("d2")));
    }

    #[test]
    fn jacobi_requires_skew() {
        let sig = sig_u();
        let mut upper = BTreeMap::new();
        upper.insert((0usize, 0usize), LaurentTensor::unit_term(&sig, 2, &[1]));
        let mut h = DiffOpMatrix::zero(&sig, 1);
        h.set_entry(0, 0, upper[&(0, 0)].clone());
        let spec = BracketSpec::new(&sig, h).unwrap();
        assert!(matches!(check_jacobi(&spec), Err(AlgebraError::SkewRequired)));
    }
}
