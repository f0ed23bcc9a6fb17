//! Laurent polynomials in formal variables with tensor coefficients, and
//! the algebra of matrix difference operators.
//!
//! A [`LaurentTensor`] is a finite sum `Σ t_e x₁^{e₁}…x_v^{e_v}` with
//! `t_e ∈ V⊗k`. The same representation covers the formal symbols λ, μ and
//! the operator variable `S`; a [`DiffOpMatrix`] entry is a one-variable
//! Laurent tensor read as `Σ aₙ Sⁿ`. In finite-order mode all exponents are
//! reduced modulo the order at construction time.

use crate::error::AlgebraError;
use crate::ncalg::{AlgebraSignature, NCPoly};
use crate::scalar::{fmt_q_factor, Q};
use crate::tensor::{InsertMode, TensorElem};
use num::Zero;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

/// Finite map from integer exponent vectors to tensor coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LaurentTensor {
    sig: Arc<AlgebraSignature>,
    arity: usize,
    nvars: usize,
    terms: BTreeMap<Vec<i64>, TensorElem>,
}

impl LaurentTensor {
    pub fn zero(sig: &Arc<AlgebraSignature>, arity: usize, nvars: usize) -> Self {
        LaurentTensor { sig: Arc::clone(sig), arity, nvars, terms: BTreeMap::new() }
    }

    /// A single term `t · x₁^{e₁}…x_v^{e_v}`.
    pub fn term(t: TensorElem, exps: &[i64]) -> Self {
        let sig = Arc::clone(t.signature());
        let arity = t.arity();
        let mut out = Self::zero(&sig, arity, exps.len());
        out.add_term(exps.to_vec(), t);
        out
    }

    /// `(1⊗…⊗1) x₁^{e₁}…`.
    pub fn unit_term(sig: &Arc<AlgebraSignature>, arity: usize, exps: &[i64]) -> Self {
        Self::term(TensorElem::one(sig, arity), exps)
    }

    pub fn signature(&self) -> &Arc<AlgebraSignature> {
        &self.sig
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<i64>, &TensorElem)> {
        self.terms.iter()
    }

    pub fn coeff(&self, exps: &[i64]) -> TensorElem {
        let exps: Vec<i64> = exps.iter().map(|&e| self.sig.reduce_exp(e)).collect();
        self.terms
            .get(&exps)
            .cloned()
            .unwrap_or_else(|| TensorElem::zero(&self.sig, self.arity))
    }

    pub fn add_term(&mut self, exps: Vec<i64>, t: TensorElem) {
        debug_assert_eq!(exps.len(), self.nvars);
        debug_assert_eq!(t.arity(), self.arity);
        if t.is_zero() {
            return;
        }
        let exps: Vec<i64> = exps.iter().map(|&e| self.sig.reduce_exp(e)).collect();
        use std::collections::btree_map::Entry;
        match self.terms.entry(exps) {
            Entry::Vacant(e) => {
                e.insert(t);
            }
            Entry::Occupied(mut e) => {
                let sum = e.get().add(&t).expect("matching arity");
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    fn check_match(&self, other: &LaurentTensor) -> Result<(), AlgebraError> {
        if self.sig != other.sig {
            return Err(AlgebraError::SignatureMismatch);
        }
        if self.arity != other.arity {
            return Err(AlgebraError::ArityMismatch { expected: self.arity, found: other.arity });
        }
        if self.nvars != other.nvars {
            return Err(AlgebraError::FormalVarOutOfRange(other.nvars));
        }
        Ok(())
    }

    pub fn add(&self, other: &LaurentTensor) -> Result<LaurentTensor, AlgebraError> {
        self.check_match(other)?;
        let mut out = self.clone();
        for (e, t) in &other.terms {
            out.add_term(e.clone(), t.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &LaurentTensor) -> Result<LaurentTensor, AlgebraError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> LaurentTensor {
        self.map_coeffs(|t| t.neg())
    }

    pub fn scale(&self, c: &Q) -> LaurentTensor {
        if c.is_zero() {
            return Self::zero(&self.sig, self.arity, self.nvars);
        }
        self.map_coeffs(|t| t.scale(c))
    }

    /// Applies a coefficient-wise map (assumed linear and arity-preserving).
    pub fn map_coeffs(&self, f: impl Fn(&TensorElem) -> TensorElem) -> LaurentTensor {
        let mut out = Self::zero(&self.sig, self.arity, self.nvars);
        for (e, t) in &self.terms {
            out.add_term(e.clone(), f(t));
        }
        out
    }

    /// Coefficient-wise map that may change arity.
    pub fn map_coeffs_arity(
        &self,
        out_arity: usize,
        f: impl Fn(&TensorElem) -> TensorElem,
    ) -> LaurentTensor {
        let mut out = Self::zero(&self.sig, out_arity, self.nvars);
        for (e, t) in &self.terms {
            out.add_term(e.clone(), f(t));
        }
        out
    }

    /// Multiplies by `x_var^k`.
    pub fn mul_var_pow(&self, var: usize, k: i64) -> LaurentTensor {
        let mut out = Self::zero(&self.sig, self.arity, self.nvars);
        for (e, t) in &self.terms {
            let mut ne = e.clone();
            ne[var] += k;
            out.add_term(ne, t.clone());
        }
        out
    }

    /// Applies `S^m` to every coefficient.
    pub fn shift_coeffs(&self, m: i64) -> LaurentTensor {
        self.map_coeffs(|t| t.shift(m))
    }

    /// Applies σ to every coefficient.
    pub fn sigma(&self) -> LaurentTensor {
        self.map_coeffs(|t| t.sigma())
    }

    /// Substitutes `x_var ↦ λ^a μ^b …` (per `target_exps`) combined with the
    /// deferred shift: a term `t·x^n` becomes `(Πᵢ xᵢ^{n·tᵢ}) Sⁿ(t)`;
    /// the variable `x_var` is removed from the exponent vector.
    ///
    /// This is the coefficient-level reading of `|_{x=S} P(… x)` when the
    /// shift acts on the coefficients themselves (skewsymmetry, k-form
    /// conditions).
    pub fn subst_var_shift_all(&self, x_var: usize, target_exps: &[i64]) -> LaurentTensor {
        debug_assert_eq!(target_exps.len() + 1, self.nvars);
        let mut out = Self::zero(&self.sig, self.arity, self.nvars - 1);
        for (e, t) in &self.terms {
            let n = e[x_var];
            let mut ne: Vec<i64> = e.clone();
            ne.remove(x_var);
            for (i, w) in target_exps.iter().enumerate() {
                ne[i] += n * w;
            }
            out.add_term(ne, t.shift(n));
        }
        out
    }

    /// The deferred-shift substitution `Σₙ λⁿ · insert(coefₙ, Sⁿ(b), mode)`:
    /// occurrences of `x_var^n` are replaced by inserting `Sⁿ(b)` at `slot`
    /// with the exponent `n` folded onto the variable `fold_var`.
    pub fn subst_shift(
        &self,
        x_var: usize,
        fold_var: usize,
        b: &NCPoly,
        slot: usize,
        mode: InsertMode,
    ) -> Result<LaurentTensor, AlgebraError> {
        if x_var >= self.nvars {
            return Err(AlgebraError::FormalVarOutOfRange(x_var));
        }
        let out_arity = match mode {
            InsertMode::TensorLeft | InsertMode::TensorRight => self.arity + 1,
            _ => self.arity,
        };
        let mut out = Self::zero(&self.sig, out_arity, self.nvars - 1);
        for (e, t) in &self.terms {
            let n = e[x_var];
            let mut ne = e.clone();
            ne.remove(x_var);
            let fv = if fold_var > x_var { fold_var - 1 } else { fold_var };
            ne[fv] += n;
            out.add_term(ne, t.insert(slot, &b.shift(n), mode)?);
        }
        Ok(out)
    }

    /// Largest exponent span per variable, for reports.
    pub fn exponent_range(&self, var: usize) -> Option<(i64, i64)> {
        let mut lo = i64::MAX;
        let mut hi = i64::MIN;
        for e in self.terms.keys() {
            lo = lo.min(e[var]);
            hi = hi.max(e[var]);
        }
        if lo > hi {
            None
        } else {
            Some((lo, hi))
        }
    }
}

impl fmt::Display for LaurentTensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let names = ["z", "w"];
        let names1 = ["z"];
        let var_names: &[&str] = if self.nvars == 1 { &names1 } else { &names };
        for (n, (e, t)) in self.terms.iter().enumerate() {
            if n > 0 {
                write!(f, " + ")?;
            }
            write!(f, "(")?;
            write!(f, "{}", t)?;
            write!(f, ")")?;
            for (i, &exp) in e.iter().enumerate() {
                if exp != 0 {
                    write!(f, "*{}^{}", var_names.get(i).unwrap_or(&"x"), exp)?;
                }
            }
        }
        Ok(())
    }
}

/// A square matrix of scalar difference operators with `V⊗V` coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiffOpMatrix {
    sig: Arc<AlgebraSignature>,
    size: usize,
    entries: Vec<Vec<LaurentTensor>>,
}

impl DiffOpMatrix {
    pub fn zero(sig: &Arc<AlgebraSignature>, size: usize) -> Self {
        let entries =
            vec![vec![LaurentTensor::zero(sig, 2, 1); size]; size];
        DiffOpMatrix { sig: Arc::clone(sig), size, entries }
    }

    pub fn identity(sig: &Arc<AlgebraSignature>, size: usize) -> Self {
        let mut m = Self::zero(sig, size);
        for i in 0..size {
            m.entries[i][i] = LaurentTensor::unit_term(sig, 2, &[0]);
        }
        m
    }

    pub fn from_entries(
        sig: &Arc<AlgebraSignature>,
        entries: Vec<Vec<LaurentTensor>>,
    ) -> Result<Self, AlgebraError> {
        let size = entries.len();
        for row in &entries {
            if row.len() != size {
                return Err(AlgebraError::SizeMismatch { left: size, right: row.len() });
            }
            for e in row {
                if e.signature() != sig || e.arity() != 2 || e.nvars() != 1 {
                    return Err(AlgebraError::SignatureMismatch);
                }
            }
        }
        Ok(DiffOpMatrix { sig: Arc::clone(sig), size, entries })
    }

    pub fn signature(&self) -> &Arc<AlgebraSignature> {
        &self.sig
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn entry(&self, i: usize, j: usize) -> &LaurentTensor {
        &self.entries[i][j]
    }

    pub fn set_entry(&mut self, i: usize, j: usize, e: LaurentTensor) {
        self.entries[i][j] = e;
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|r| r.iter().all(|e| e.is_zero()))
    }

    pub fn add(&self, other: &DiffOpMatrix) -> Result<DiffOpMatrix, AlgebraError> {
        if self.size != other.size {
            return Err(AlgebraError::SizeMismatch { left: self.size, right: other.size });
        }
        let mut out = self.clone();
        for i in 0..self.size {
            for j in 0..self.size {
                out.entries[i][j] = out.entries[i][j].add(&other.entries[i][j])?;
            }
        }
        Ok(out)
    }

    pub fn neg(&self) -> DiffOpMatrix {
        let mut out = self.clone();
        for row in &mut out.entries {
            for e in row {
                *e = e.neg();
            }
        }
        out
    }

    /// Scalar-operator composition `aS^m • bS^n = (a • S^m(b)) S^{m+n}`.
    pub fn compose_entries(
        a: &LaurentTensor,
        b: &LaurentTensor,
    ) -> Result<LaurentTensor, AlgebraError> {
        if a.signature() != b.signature() {
            return Err(AlgebraError::SignatureMismatch);
        }
        let sig = a.signature();
        let mut out = LaurentTensor::zero(sig, 2, 1);
        for (ea, ta) in a.terms() {
            let m = ea[0];
            for (eb, tb) in b.terms() {
                let n = eb[0];
                out.add_term(vec![m + n], ta.bullet(&tb.shift(m))?);
            }
        }
        Ok(out)
    }

    /// Matrix product with the `•`-composition on entries.
    pub fn compose(&self, other: &DiffOpMatrix) -> Result<DiffOpMatrix, AlgebraError> {
        if self.sig != other.sig {
            return Err(AlgebraError::SignatureMismatch);
        }
        if self.size != other.size {
            return Err(AlgebraError::SizeMismatch { left: self.size, right: other.size });
        }
        let mut out = Self::zero(&self.sig, self.size);
        for i in 0..self.size {
            for j in 0..self.size {
                let mut acc = LaurentTensor::zero(&self.sig, 2, 1);
                for k in 0..self.size {
                    acc = acc.add(&Self::compose_entries(
                        &self.entries[i][k],
                        &other.entries[k][j],
                    )?)?;
                }
                out.entries[i][j] = acc;
            }
        }
        Ok(out)
    }

    /// Adjoint of a scalar entry: `(aSⁿ)* = (S^{-n}(a'') ⊗ S^{-n}(a')) S^{-n}`.
    pub fn adjoint_entry(a: &LaurentTensor) -> LaurentTensor {
        let mut out = LaurentTensor::zero(a.signature(), 2, 1);
        for (e, t) in a.terms() {
            let n = e[0];
            out.add_term(vec![-n], t.sigma().shift(-n));
        }
        out
    }

    /// Matrix adjoint: entries adjointed and transposed.
    pub fn adjoint(&self) -> DiffOpMatrix {
        let mut out = Self::zero(&self.sig, self.size);
        for i in 0..self.size {
            for j in 0..self.size {
                out.entries[i][j] = Self::adjoint_entry(&self.entries[j][i]);
            }
        }
        out
    }

    /// Vector action `(HF)ᵢ = Σ_{j,n} H'_{ij;n} Sⁿ(F_j) H''_{ij;n}`.
    pub fn apply_to_vector(&self, f: &[NCPoly]) -> Result<Vec<NCPoly>, AlgebraError> {
        if f.len() != self.size {
            return Err(AlgebraError::LengthMismatch { expected: self.size, found: f.len() });
        }
        let mut out = Vec::with_capacity(self.size);
        for i in 0..self.size {
            let mut acc = NCPoly::zero(&self.sig);
            for (j, fj) in f.iter().enumerate() {
                if fj.signature() != &self.sig {
                    return Err(AlgebraError::SignatureMismatch);
                }
                for (e, t) in self.entries[i][j].terms() {
                    acc = acc.add(&t.sandwich(&fj.shift(e[0]))?)?;
                }
            }
            out.push(acc);
        }
        Ok(out)
    }

    /// True when `H* = −H`; otherwise the first failing entry in row-major
    /// order together with `(H* + H)_{ij}` as a witness.
    pub fn skew_witness(&self) -> Option<(usize, usize, LaurentTensor)> {
        let adj = self.adjoint();
        for i in 0..self.size {
            for j in 0..self.size {
                let defect = adj.entries[i][j].add(&self.entries[i][j]).unwrap();
                if !defect.is_zero() {
                    return Some((i, j, defect));
                }
            }
        }
        None
    }

    pub fn is_skew_adjoint(&self) -> bool {
        self.skew_witness().is_none()
    }

    pub fn is_self_adjoint(&self) -> bool {
        self.adjoint() == *self
    }
}

impl fmt::Display for DiffOpMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.size {
            for j in 0..self.size {
                writeln!(f, "[{},{}] {}", i, j, self.entries[i][j])?;
            }
        }
        Ok(())
    }
}

/// Pretty-printer for λ-valued Laurent tensors in reports: one line per
/// exponent vector, sorted.
pub fn format_laurent(t: &LaurentTensor, var_names: &[&str]) -> String {
    if t.is_zero() {
        return "0".to_string();
    }
    let mut lines = Vec::new();
    for (e, coeff) in t.terms() {
        let mut head = String::new();
        for (i, &exp) in e.iter().enumerate() {
            let name = var_names.get(i).copied().unwrap_or("x");
            if !head.is_empty() {
                head.push('*');
            }
            head.push_str(&format!("{}^{}", name, exp));
        }
        lines.push(format!("{}: {}", head, coeff));
    }
    lines.join("\n")
}

/// Scales a tensor and keeps the rational-factor formatting helpers nearby
/// for report output.
pub fn format_scaled(c: &Q, body: &str) -> String {
    format!("{}{}", fmt_q_factor(c), body)
}
