//! The free noncommutative difference algebra `R_ℓ`.
//!
//! Elements are exact-rational linear combinations of words in the
//! indeterminates `u_{i,n}` (variable `i`, shift `n`). The shift
//! automorphism `S` sends `u_{i,n}` to `u_{i,n+1}`; in finite-order mode
//! (`S^e = 1`) shift indices live in `[0, e)`.

use crate::error::AlgebraError;
use crate::scalar::{fmt_q_factor, Q};
use crate::tensor::TensorElem;
use num::{One, Zero};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

/// Order of the shift automorphism.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShiftOrder {
    /// `S` has infinite order; shifts are arbitrary integers.
    Infinite,
    /// `S^e = 1`; shifts are residues in `[0, e)`.
    Finite(u32),
}

/// Signature of a free difference algebra: variable names and shift order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlgebraSignature {
    names: Vec<String>,
    order: ShiftOrder,
}

impl AlgebraSignature {
    pub fn new(names: Vec<String>, order: ShiftOrder) -> Result<Arc<Self>, AlgebraError> {
        if names.is_empty() {
            return Err(AlgebraError::Parse("signature needs at least one variable".into()));
        }
        let distinct: BTreeSet<&String> = names.iter().collect();
        if distinct.len() != names.len() {
            return Err(AlgebraError::Parse("variable names must be distinct".into()));
        }
        if let ShiftOrder::Finite(e) = order {
            if e == 0 {
                return Err(AlgebraError::Parse("finite shift order must be >= 1".into()));
            }
        }
        Ok(Arc::new(AlgebraSignature { names, order }))
    }

    /// Convenience constructor with infinite shift order.
    pub fn infinite(names: &[&str]) -> Arc<Self> {
        Self::new(names.iter().map(|s| s.to_string()).collect(), ShiftOrder::Infinite).unwrap()
    }

    /// Convenience constructor with `S` of finite order `e`.
    pub fn finite(names: &[&str], e: u32) -> Arc<Self> {
        Self::new(names.iter().map(|s| s.to_string()).collect(), ShiftOrder::Finite(e)).unwrap()
    }

    pub fn num_vars(&self) -> usize {
        self.names.len()
    }

    pub fn order(&self) -> ShiftOrder {
        self.order
    }

    pub fn name(&self, var: usize) -> &str {
        &self.names[var]
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Reduces a shift index to its canonical representative.
    pub fn reduce_shift(&self, n: i64) -> i64 {
        match self.order {
            ShiftOrder::Infinite => n,
            ShiftOrder::Finite(e) => n.rem_euclid(e as i64),
        }
    }

    /// Reduces a formal (λ, μ, S) exponent; identical to `reduce_shift`.
    pub fn reduce_exp(&self, n: i64) -> i64 {
        self.reduce_shift(n)
    }
}

/// A single indeterminate `u_{var, shift}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Generator {
    pub var: usize,
    pub shift: i64,
}

impl Generator {
    pub fn new(sig: &AlgebraSignature, var: usize, shift: i64) -> Result<Self, AlgebraError> {
        if var >= sig.num_vars() {
            return Err(AlgebraError::VarOutOfRange(var));
        }
        Ok(Generator { var, shift: sig.reduce_shift(shift) })
    }
}

/// A word in the free algebra; the empty word is the unit.
///
/// Words are ordered length-first, then lexicographically by
/// `(var, shift)` with shifts compared as integers. This is the canonical
/// term order used everywhere for deterministic output.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Word(pub Vec<Generator>);

impl Word {
    pub fn one() -> Self {
        Word(Vec::new())
    }

    pub fn letter(g: Generator) -> Self {
        Word(vec![g])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn shifted(&self, sig: &AlgebraSignature, m: i64) -> Word {
        Word(
            self.0
                .iter()
                .map(|g| Generator { var: g.var, shift: sig.reduce_shift(g.shift + m) })
                .collect(),
        )
    }

    fn fmt_with(&self, sig: &AlgebraSignature, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "1");
        }
        for (k, g) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, "*")?;
            }
            if g.shift == 0 {
                write!(f, "{}", sig.name(g.var))?;
            } else {
                write!(f, "{}[{}]", sig.name(g.var), g.shift)?;
            }
        }
        Ok(())
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.len().cmp(&other.len()).then_with(|| self.0.cmp(&other.0))
    }
}

/// A noncommutative difference polynomial in canonical form.
///
/// Stored as a map from words to nonzero rational coefficients; the zero
/// polynomial is the empty map and the unit is `{1 ↦ 1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NCPoly {
    sig: Arc<AlgebraSignature>,
    terms: BTreeMap<Word, Q>,
}

impl NCPoly {
    pub fn zero(sig: &Arc<AlgebraSignature>) -> Self {
        NCPoly { sig: Arc::clone(sig), terms: BTreeMap::new() }
    }

    pub fn one(sig: &Arc<AlgebraSignature>) -> Self {
        Self::constant(sig, Q::one())
    }

    pub fn constant(sig: &Arc<AlgebraSignature>, c: Q) -> Self {
        let mut p = Self::zero(sig);
        p.add_term(Word::one(), c);
        p
    }

    /// The generator `u_{var, shift}` as a polynomial.
    pub fn gen(sig: &Arc<AlgebraSignature>, var: usize, shift: i64) -> Result<Self, AlgebraError> {
        let g = Generator::new(sig, var, shift)?;
        let mut p = Self::zero(sig);
        p.add_term(Word::letter(g), Q::one());
        Ok(p)
    }

    pub fn from_terms(
        sig: &Arc<AlgebraSignature>,
        terms: impl IntoIterator<Item = (Word, Q)>,
    ) -> Self {
        let mut p = Self::zero(sig);
        for (w, c) in terms {
            p.add_term(w, c);
        }
        p
    }

    pub fn signature(&self) -> &Arc<AlgebraSignature> {
        &self.sig
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, &Q)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, w: &Word) -> Q {
        self.terms.get(w).cloned().unwrap_or_else(Q::zero)
    }

    pub(crate) fn add_term(&mut self, w: Word, c: Q) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(w) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                let sum = e.get().clone() + c;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    fn check_sig(&self, other: &NCPoly) -> Result<(), AlgebraError> {
        if self.sig == other.sig {
            Ok(())
        } else {
            Err(AlgebraError::SignatureMismatch)
        }
    }

    pub fn add(&self, other: &NCPoly) -> Result<NCPoly, AlgebraError> {
        self.check_sig(other)?;
        let mut out = self.clone();
        for (w, c) in &other.terms {
            out.add_term(w.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &NCPoly) -> Result<NCPoly, AlgebraError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> NCPoly {
        self.scale(&-Q::one())
    }

    pub fn scale(&self, c: &Q) -> NCPoly {
        if c.is_zero() {
            return Self::zero(&self.sig);
        }
        NCPoly {
            sig: Arc::clone(&self.sig),
            terms: self.terms.iter().map(|(w, q)| (w.clone(), q.clone() * c)).collect(),
        }
    }

    /// Free-algebra product: bilinear extension of word concatenation.
    pub fn mul(&self, other: &NCPoly) -> Result<NCPoly, AlgebraError> {
        self.check_sig(other)?;
        let mut out = Self::zero(&self.sig);
        for (w1, c1) in &self.terms {
            for (w2, c2) in &other.terms {
                out.add_term(w1.concat(w2), c1.clone() * c2);
            }
        }
        Ok(out)
    }

    pub fn pow(&self, k: u32) -> NCPoly {
        let mut out = Self::one(&self.sig);
        for _ in 0..k {
            out = out.mul(self).unwrap();
        }
        out
    }

    /// The automorphism `S^m`.
    pub fn shift(&self, m: i64) -> NCPoly {
        NCPoly {
            sig: Arc::clone(&self.sig),
            terms: self
                .terms
                .iter()
                .map(|(w, c)| (w.shifted(&self.sig, m), c.clone()))
                .collect(),
        }
    }

    /// The 2-fold partial derivative `∂/∂u_{var,shift}`.
    ///
    /// Every occurrence of the matching letter in a word is removed and the
    /// word splits into (prefix ⊗ suffix).
    pub fn partial(&self, var: usize, shift: i64) -> TensorElem {
        let shift = self.sig.reduce_shift(shift);
        let mut out = TensorElem::zero(&self.sig, 2);
        for (w, c) in &self.terms {
            for (k, g) in w.0.iter().enumerate() {
                if g.var == var && g.shift == shift {
                    let prefix = Word(w.0[..k].to_vec());
                    let suffix = Word(w.0[k + 1..].to_vec());
                    out.add_term(vec![prefix, suffix], c.clone());
                }
            }
        }
        out
    }

    /// The set of `(var, shift)` with nonzero partial derivative.
    pub fn support(&self) -> BTreeSet<(usize, i64)> {
        // For the free algebra every occurring letter has a nonzero partial.
        let mut s = BTreeSet::new();
        for w in self.terms.keys() {
            for g in &w.0 {
                s.insert((g.var, g.shift));
            }
        }
        s
    }

    /// Sum of all coefficients (evaluation of every generator at 1); used by
    /// λ=μ=1 specialisations elsewhere.
    pub fn coeff_sum(&self) -> Q {
        self.terms.values().fold(Q::zero(), |a, b| a + b)
    }

    /// Commutator `[self, other]`.
    pub fn commutator(&self, other: &NCPoly) -> Result<NCPoly, AlgebraError> {
        self.mul(other)?.sub(&other.mul(self)?)
    }
}

impl fmt::Display for NCPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (w, c)) in self.terms.iter().enumerate() {
            let (neg, abs) = if crate::scalar::is_negative(c) {
                (true, -c.clone())
            } else {
                (false, c.clone())
            };
            if k == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            if w.is_empty() {
                write!(f, "{}", crate::scalar::fmt_q(&abs))?;
            } else {
                write!(f, "{}", fmt_q_factor(&abs))?;
                w.fmt_with(&self.sig, f)?;
            }
        }
        Ok(())
    }
}
