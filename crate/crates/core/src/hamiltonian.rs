//! Local functionals, variational derivatives, Hamiltonian flows, the
//! weak-Jacobi defect and the variational complex on forms of degree ≤ 3.
//!
//! The space of local functionals is `F = V/([V,V] + (S−1)V)`; a class is
//! stored by the canonical representative obtained per word by taking, among
//! all cyclic rotations translated so the minimal shift index is 0, the
//! lexicographically least word.

use crate::bracket::{triple_bracket, BracketSpec};
use crate::diffop::{DiffOpMatrix, LaurentTensor};
use crate::error::AlgebraError;
use crate::ncalg::{AlgebraSignature, NCPoly, ShiftOrder, Word};
use crate::tensor::{InsertMode, TensorElem};
use std::fmt;
use std::sync::Arc;

/// An element of `F = V/([V,V] + (S−1)V)`, by canonical representative.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalFunctional {
    rep: NCPoly,
}

impl LocalFunctional {
    pub fn representative(&self) -> &NCPoly {
        &self.rep
    }

    pub fn is_zero(&self) -> bool {
        self.rep.is_zero()
    }

    pub fn signature(&self) -> &Arc<AlgebraSignature> {
        self.rep.signature()
    }
}

impl fmt::Display for LocalFunctional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "int {}", self.rep)
    }
}

fn canonical_word(sig: &Arc<AlgebraSignature>, w: &Word) -> Word {
    if w.is_empty() {
        return Word::one();
    }
    let n = w.len();
    let mut best: Option<Word> = None;
    for r in 0..n {
        let mut rotated: Vec<crate::ncalg::Generator> = Vec::with_capacity(n);
        rotated.extend_from_slice(&w.0[r..]);
        rotated.extend_from_slice(&w.0[..r]);
        let rot = Word(rotated);
        let candidates: Vec<Word> = match sig.order() {
            ShiftOrder::Infinite => {
                let min = rot.0.iter().map(|g| g.shift).min().unwrap();
                vec![rot.shifted(sig, -min)]
            }
            ShiftOrder::Finite(e) => (0..e as i64).map(|d| rot.shifted(sig, d)).collect(),
        };
        for cand in candidates {
            if best.as_ref().map_or(true, |b| cand < *b) {
                best = Some(cand);
            }
        }
    }
    best.unwrap()
}

/// Projects a difference polynomial onto its class in
/// `V/([V,V] + (S−1)V)`: coefficients of necklace-equivalent words are
/// summed on the canonical representative.
pub fn canonicalize(f: &NCPoly) -> LocalFunctional {
    let sig = f.signature();
    let mut rep = NCPoly::zero(sig);
    for (w, c) in f.terms() {
        rep = rep
            .add(&NCPoly::from_terms(sig, [(canonical_word(sig, w), c.clone())]))
            .unwrap();
    }
    LocalFunctional { rep }
}

/// The difference variational derivative `δf/δu_i = Σₙ S^{-n} ∂f/∂u_{i,n}`.
pub fn variational_derivative(f: &NCPoly, var: usize) -> TensorElem {
    let sig = f.signature();
    let mut out = TensorElem::zero(sig, 2);
    for (v, n) in f.support() {
        if v != var {
            continue;
        }
        out = out.add(&f.partial(var, n).shift(-n)).unwrap();
    }
    out
}

/// The variational gradient as a vector: `(δf)_i = m((δf/δu_i)^σ)`.
pub fn variational_gradient(f: &NCPoly) -> Vec<NCPoly> {
    let sig = f.signature();
    (0..sig.num_vars()).map(|i| variational_derivative(f, i).sigma().mult()).collect()
}

/// Characteristics of an evolutionary vector field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvolutionEquation {
    sig: Arc<AlgebraSignature>,
    pub characteristics: Vec<NCPoly>,
}

impl EvolutionEquation {
    pub fn new(sig: &Arc<AlgebraSignature>, p: Vec<NCPoly>) -> Result<Self, AlgebraError> {
        if p.len() != sig.num_vars() {
            return Err(AlgebraError::LengthMismatch { expected: sig.num_vars(), found: p.len() });
        }
        for x in &p {
            if x.signature() != sig {
                return Err(AlgebraError::SignatureMismatch);
            }
        }
        Ok(EvolutionEquation { sig: Arc::clone(sig), characteristics: p })
    }

    pub fn zero(sig: &Arc<AlgebraSignature>) -> Self {
        EvolutionEquation {
            sig: Arc::clone(sig),
            characteristics: vec![NCPoly::zero(sig); sig.num_vars()],
        }
    }

    pub fn signature(&self) -> &Arc<AlgebraSignature> {
        &self.sig
    }

    pub fn is_zero(&self) -> bool {
        self.characteristics.iter().all(|p| p.is_zero())
    }
}

/// The evolutionary vector field:
/// `X_P(f) = Σ_{i,n} m((Sⁿ P_i) ∗₁ ∂f/∂u_{i,n})`.
pub fn apply_evolutionary(p: &EvolutionEquation, f: &NCPoly) -> Result<NCPoly, AlgebraError> {
    if f.signature() != &p.sig {
        return Err(AlgebraError::SignatureMismatch);
    }
    let mut out = NCPoly::zero(&p.sig);
    for (i, n) in f.support() {
        let d = f.partial(i, n);
        let shifted = p.characteristics[i].shift(n);
        out = out.add(&d.insert(1, &shifted, InsertMode::MulLeft)?.mult())?;
    }
    Ok(out)
}

/// `[P,Q]_i = X_P(Q_i) − X_Q(P_i)`.
pub fn vf_commutator(
    p: &EvolutionEquation,
    q: &EvolutionEquation,
) -> Result<EvolutionEquation, AlgebraError> {
    if p.sig != q.sig {
        return Err(AlgebraError::SignatureMismatch);
    }
    let mut chars = Vec::with_capacity(p.sig.num_vars());
    for i in 0..p.sig.num_vars() {
        chars.push(
            apply_evolutionary(p, &q.characteristics[i])?
                .sub(&apply_evolutionary(q, &p.characteristics[i])?)?,
        );
    }
    EvolutionEquation::new(&p.sig, chars)
}

/// The Hamiltonian flow of `∫h`:
/// `du_i/dt = m Σ_j H_ij(S) • (δh/δu_j)^σ`, which coincides with the
/// operator action of `H` on the variational gradient.
pub fn hamiltonian_flow(
    spec: &BracketSpec,
    h: &LocalFunctional,
) -> Result<EvolutionEquation, AlgebraError> {
    let sig = spec.signature();
    let grad = variational_gradient(h.representative());
    let chars = spec.matrix().apply_to_vector(&grad)?;
    EvolutionEquation::new(sig, chars)
}

/// Lie bracket on local functionals:
/// `{∫f, ∫g} = ∫ Σ_j (δg)_j · (H δf)_j`.
pub fn functional_bracket(
    spec: &BracketSpec,
    f: &LocalFunctional,
    g: &LocalFunctional,
) -> Result<LocalFunctional, AlgebraError> {
    let sig = spec.signature();
    let grad_f = variational_gradient(f.representative());
    let grad_g = variational_gradient(g.representative());
    let h_grad_f = spec.matrix().apply_to_vector(&grad_f)?;
    let mut total = NCPoly::zero(sig);
    for (gj, hj) in grad_g.iter().zip(h_grad_f.iter()) {
        total = total.add(&gj.mul(hj)?)?;
    }
    Ok(canonicalize(&total))
}

/// The multiplied triple bracket `{a λ b μ c} = m∘(m⊗1) {{a λ b μ c}}` as a
/// two-variable Laurent polynomial with arity-1 coefficients.
pub fn mult_triple(
    spec: &BracketSpec,
    a: &NCPoly,
    b: &NCPoly,
    c: &NCPoly,
) -> Result<LaurentTensor, AlgebraError> {
    let t = triple_bracket(spec, a, b, c)?;
    Ok(t.map_coeffs_arity(1, |x| TensorElem::from_polys(&[&x.mult()]).expect("arity 1")))
}

/// The derivation defect
/// `D_{f,h}(u_i) = ({f λ h μ u_i} − {h μ f λ u_i})|_{λ=μ=1}` on all
/// generators. `D_{f,h}` is a derivation, so these values determine it.
pub fn weak_jacobi_defect(
    spec: &BracketSpec,
    f: &NCPoly,
    h: &NCPoly,
) -> Result<Vec<NCPoly>, AlgebraError> {
    let sig = spec.signature();
    let mut out = Vec::with_capacity(sig.num_vars());
    for i in 0..sig.num_vars() {
        let ui = NCPoly::gen(sig, i, 0)?;
        let fwd = mult_triple(spec, f, h, &ui)?;
        let bwd = mult_triple(spec, h, f, &ui)?;
        let val = crate::bracket::specialize_ones(&fwd.sub(&bwd)?).into_poly()?;
        out.push(val);
    }
    Ok(out)
}

/// A form of degree `k ≤ 3` in the variational complex, as an array over
/// index tuples satisfying the cyclic skewadjointness condition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum KForm {
    /// Degree 0: a local functional.
    Zero(LocalFunctional),
    /// Degree 1: a vector `(F_i)` — no constraint.
    One(Arc<AlgebraSignature>, Vec<NCPoly>),
    /// Degree 2: `A_ij(λ)` with `A_ij(λ) = −(|_{x=S} A_ji(λ⁻¹x⁻¹))^σ`.
    Two(Arc<AlgebraSignature>, Vec<Vec<LaurentTensor>>),
    /// Degree 3: `A_ijk(λ,μ)` with
    /// `A_ijk(λ,μ) = (|_{x=S} A_jki(μ, λ⁻¹μ⁻¹x⁻¹))^σ`.
    Three(Arc<AlgebraSignature>, Vec<Vec<Vec<LaurentTensor>>>),
}

impl KForm {
    pub fn degree(&self) -> usize {
        match self {
            KForm::Zero(_) => 0,
            KForm::One(..) => 1,
            KForm::Two(..) => 2,
            KForm::Three(..) => 3,
        }
    }

    pub fn signature(&self) -> &Arc<AlgebraSignature> {
        match self {
            KForm::Zero(f) => f.signature(),
            KForm::One(s, _) | KForm::Two(s, _) | KForm::Three(s, _) => s,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            KForm::Zero(f) => f.is_zero(),
            KForm::One(_, v) => v.iter().all(|p| p.is_zero()),
            KForm::Two(_, m) => m.iter().all(|r| r.iter().all(|e| e.is_zero())),
            KForm::Three(_, c) => c.iter().all(|m| m.iter().all(|r| r.iter().all(|e| e.is_zero()))),
        }
    }

    /// Validates the defining skewadjointness condition of the array space.
    pub fn validate(&self) -> Result<(), AlgebraError> {
        match self {
            KForm::Zero(_) | KForm::One(..) => Ok(()),
            KForm::Two(sig, m) => {
                let l = sig.num_vars();
                if m.len() != l || m.iter().any(|r| r.len() != l) {
                    return Err(AlgebraError::SizeMismatch { left: m.len(), right: l });
                }
                for (i, row) in m.iter().enumerate() {
                    for (j, a_ij) in row.iter().enumerate() {
                        // −(|_{x=S} A_ji(λ⁻¹x⁻¹))^σ: λ^p of A_ji contributes
                        // −λ^{-p} (S^{-p} t)^σ
                        let mut mirror = LaurentTensor::zero(sig, 2, 1);
                        for (e, t) in m[j][i].terms() {
                            mirror.add_term(vec![-e[0]], t.shift(-e[0]).sigma().neg());
                        }
                        if &mirror != a_ij {
                            return Err(AlgebraError::Parse(format!(
                                "2-form entry ({i},{j}) violates skewadjointness"
                            )));
                        }
                    }
                }
                Ok(())
            }
            KForm::Three(sig, c) => {
                let l = sig.num_vars();
                if c.len() != l {
                    return Err(AlgebraError::SizeMismatch { left: c.len(), right: l });
                }
                for i in 0..l {
                    for j in 0..l {
                        for k in 0..l {
                            // (|_{x=S} A_jki(μ, λ⁻¹μ⁻¹x⁻¹))^σ:
                            // term λ^a μ^b of A_jki lands at λ^{-b} μ^{a-b}
                            // with coefficient (S^{-b} t)^σ
                            let mut mirror = LaurentTensor::zero(sig, 3, 2);
                            for (e, t) in c[j][k][i].terms() {
                                let (a, b) = (e[0], e[1]);
                                mirror.add_term(vec![-b, a - b], t.shift(-b).sigma());
                            }
                            if mirror != c[i][j][k] {
                                return Err(AlgebraError::Parse(format!(
                                    "3-form entry ({i},{j},{k}) violates skewadjointness"
                                )));
                            }
                        }
                    }
                }
                Ok(())
            }
        }
    }
}

/// The variational differential `δ` on forms of degree ≤ 2.
pub fn de_rham_delta(form: &KForm) -> Result<KForm, AlgebraError> {
    form.validate()?;
    let sig = Arc::clone(form.signature());
    let l = sig.num_vars();
    match form {
        // (δ∫f)_i = m (δf/δu_i)^σ
        KForm::Zero(f) => {
            let v = variational_gradient(f.representative());
            Ok(KForm::One(sig, v))
        }
        // (δF)_ij(λ) = ½ Σₙ ( ∂F_j/∂u_{i,n} λⁿ − (λS)^{-n} (∂F_i/∂u_{j,n})^σ )
        KForm::One(_, fs) => {
            if fs.len() != l {
                return Err(AlgebraError::LengthMismatch { expected: l, found: fs.len() });
            }
            let half = crate::scalar::qr(1, 2);
            let mut m = vec![vec![LaurentTensor::zero(&sig, 2, 1); l]; l];
            #[allow(clippy::needless_range_loop)]
            for i in 0..l {
                for j in 0..l {
                    let mut acc = LaurentTensor::zero(&sig, 2, 1);
                    for (v, n) in fs[j].support() {
                        if v == i {
                            acc.add_term(vec![n], fs[j].partial(i, n));
                        }
                    }
                    for (v, n) in fs[i].support() {
                        if v == j {
                            acc.add_term(vec![-n], fs[i].partial(j, n).sigma().shift(-n).neg());
                        }
                    }
                    m[i][j] = acc.scale(&half);
                }
            }
            let out = KForm::Two(sig, m);
            out.validate()?;
            Ok(out)
        }
        // (δA)_ijk(λ,μ) = 2/3 Σₙ ( (∂/∂u_{i,n})_L A_jk(μ) λⁿ
        //   − (∂/∂u_{j,n})_R A_ik(λ) μⁿ
        //   + (λμS)^{-n} ((∂/∂u_{k,n})_L A_ij(λ))^{σ²} )
        KForm::Two(_, a) => {
            let two_thirds = crate::scalar::qr(2, 3);
            let mut c = vec![vec![vec![LaurentTensor::zero(&sig, 3, 2); l]; l]; l];
            #[allow(clippy::needless_range_loop)]
            for i in 0..l {
                for j in 0..l {
                    for k in 0..l {
                        let mut acc = LaurentTensor::zero(&sig, 3, 2);
                        for (e, t) in a[j][k].terms() {
                            let q = e[0];
                            for (v, n) in t.support() {
                                if v == i {
                                    acc.add_term(vec![n, q], t.partial_left(i, n)?);
                                }
                            }
                        }
                        for (e, t) in a[i][k].terms() {
                            let p = e[0];
                            for (v, n) in t.support() {
                                if v == j {
                                    acc.add_term(vec![p, n], t.partial_right(j, n)?.neg());
                                }
                            }
                        }
                        // (λμS)^{-n}((∂/∂u_{k,n})_L A_ij(λ))^{σ²}: a λ^p term
                        // lands at λ^{p-n} μ^{-n} with S^{-n} after σ².
                        for (e, t) in a[i][j].terms() {
                            let p = e[0];
                            for (v, n) in t.support() {
                                if v == k {
                                    let d = t.partial_left(k, n)?.sigma_pow(2).shift(-n);
                                    acc.add_term(vec![p - n, -n], d);
                                }
                            }
                        }
                        c[i][j][k] = acc.scale(&two_thirds);
                    }
                }
            }
            let out = KForm::Three(sig, c);
            out.validate()?;
            Ok(out)
        }
        KForm::Three(..) => Err(AlgebraError::Parse("δ on 3-forms is out of range".into())),
    }
}

/// The Frechet derivative `D_F(λ)_ij = Σₙ ∂F_i/∂u_{j,n} λⁿ` of a vector of
/// difference polynomials, as a matrix difference operator.
pub fn frechet_derivative(fs: &[NCPoly]) -> Result<DiffOpMatrix, AlgebraError> {
    if fs.is_empty() {
        return Err(AlgebraError::LengthMismatch { expected: 1, found: 0 });
    }
    let sig = Arc::clone(fs[0].signature());
    let l = sig.num_vars();
    if fs.len() != l {
        return Err(AlgebraError::LengthMismatch { expected: l, found: fs.len() });
    }
    let mut m = DiffOpMatrix::zero(&sig, l);
    for (i, fi) in fs.iter().enumerate() {
        for (j, n) in fi.support() {
            let mut entry = m.entry(i, j).clone();
            entry.add_term(vec![n], fi.partial(j, n));
            m.set_entry(i, j, entry);
        }
    }
    Ok(m)
}

/// A 1-form is closed iff its Frechet derivative is self-adjoint iff its
/// variational differential vanishes.
pub fn is_closed_one_form(fs: &[NCPoly]) -> Result<bool, AlgebraError> {
    Ok(frechet_derivative(fs)?.is_self_adjoint())
}
