//! Tensor powers `V⊗k` (k ≤ 4) of the free difference algebra and their
//! structural operations: the cyclic permutation `σ`, bimodule actions,
//! insertion products, the associative `•` product and its six module
//! actions on `V⊗3`, slot-wise derivations and shifts.

use crate::error::AlgebraError;
use crate::ncalg::{AlgebraSignature, NCPoly, Word};
use crate::scalar::{fmt_q_factor, Q};
use num::{One, Zero};
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

pub const MAX_ARITY: usize = 4;

/// How [`TensorElem::insert`] places a polynomial into a tensor.
///
/// With factors indexed `0..k` from the left:
/// * `MulLeft(i)`-style left module action `b ∗ᵢ t` left-multiplies factor `i`,
/// * `MulRight(i)` action `t ∗ᵢ b` right-multiplies factor `k−1−i`,
/// * `TensorLeft(i)` insertion `b ⊗ᵢ t` makes `b` the new factor at position `i`,
/// * `TensorRight(i)` insertion `t ⊗ᵢ b` makes `b` the new factor at position `k−i`,
/// * `OuterL`/`OuterR` are the outer bimodule actions `a·A` / `A·b` on `V⊗2`,
/// * `InnerL`/`InnerR` are the inner actions `a ∗ A` / `A ∗ b` on `V⊗2`.
///
/// Module-action slots are read modulo `k` (`∗_{i+k} = ∗ᵢ`); tensor-insertion
/// slots must be in range.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InsertMode {
    MulLeft,
    MulRight,
    TensorLeft,
    TensorRight,
    OuterL,
    OuterR,
    InnerL,
    InnerR,
}

/// Which side a `•ᵢ` action acts from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// An element of `V⊗k` as a map from `k`-tuples of words to nonzero
/// rational coefficients. Arity is a runtime field so every operation has a
/// uniform signature; mixed-arity arithmetic is an error.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TensorElem {
    sig: Arc<AlgebraSignature>,
    arity: usize,
    terms: BTreeMap<Vec<Word>, Q>,
}

impl TensorElem {
    pub fn zero(sig: &Arc<AlgebraSignature>, arity: usize) -> Self {
        assert!((1..=MAX_ARITY).contains(&arity), "arity {arity} out of range");
        TensorElem { sig: Arc::clone(sig), arity, terms: BTreeMap::new() }
    }

    /// The unit `1 ⊗ … ⊗ 1`.
    pub fn one(sig: &Arc<AlgebraSignature>, arity: usize) -> Self {
        let mut t = Self::zero(sig, arity);
        t.add_term(vec![Word::one(); arity], Q::one());
        t
    }

    /// Multilinear expansion of a pure tensor of polynomials.
    pub fn from_polys(factors: &[&NCPoly]) -> Result<Self, AlgebraError> {
        if factors.is_empty() || factors.len() > MAX_ARITY {
            return Err(AlgebraError::ArityOutOfRange(factors.len()));
        }
        let sig = factors[0].signature();
        for p in factors {
            if p.signature() != sig {
                return Err(AlgebraError::SignatureMismatch);
            }
        }
        let mut out = Self::zero(sig, factors.len());
        let mut stack: Vec<(Vec<Word>, Q)> = vec![(Vec::new(), Q::one())];
        for p in factors {
            let mut next = Vec::new();
            for (prefix, c) in &stack {
                for (w, q) in p.terms() {
                    let mut key = prefix.clone();
                    key.push(w.clone());
                    next.push((key, c.clone() * q));
                }
            }
            stack = next;
        }
        for (key, c) in stack {
            out.add_term(key, c);
        }
        Ok(out)
    }

    pub fn signature(&self) -> &Arc<AlgebraSignature> {
        &self.sig
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<Word>, &Q)> {
        self.terms.iter()
    }

    pub fn coeff(&self, key: &[Word]) -> Q {
        self.terms.get(key).cloned().unwrap_or_else(Q::zero)
    }

    pub(crate) fn add_term(&mut self, key: Vec<Word>, c: Q) {
        debug_assert_eq!(key.len(), self.arity);
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(key) {
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

    fn check_match(&self, other: &TensorElem) -> Result<(), AlgebraError> {
        if self.sig != other.sig {
            return Err(AlgebraError::SignatureMismatch);
        }
        if self.arity != other.arity {
            return Err(AlgebraError::ArityMismatch { expected: self.arity, found: other.arity });
        }
        Ok(())
    }

    pub fn add(&self, other: &TensorElem) -> Result<TensorElem, AlgebraError> {
        self.check_match(other)?;
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.add_term(k.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &TensorElem) -> Result<TensorElem, AlgebraError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> TensorElem {
        self.scale(&-Q::one())
    }

    pub fn scale(&self, c: &Q) -> TensorElem {
        if c.is_zero() {
            return Self::zero(&self.sig, self.arity);
        }
        TensorElem {
            sig: Arc::clone(&self.sig),
            arity: self.arity,
            terms: self.terms.iter().map(|(k, q)| (k.clone(), q.clone() * c)).collect(),
        }
    }

    /// Factor-wise product of `V⊗k` as an associative algebra.
    pub fn factor_mul(&self, other: &TensorElem) -> Result<TensorElem, AlgebraError> {
        self.check_match(other)?;
        let mut out = Self::zero(&self.sig, self.arity);
        for (k1, c1) in &self.terms {
            for (k2, c2) in &other.terms {
                let key: Vec<Word> =
                    k1.iter().zip(k2.iter()).map(|(a, b)| a.concat(b)).collect();
                out.add_term(key, c1.clone() * c2);
            }
        }
        Ok(out)
    }

    /// Cyclic permutation `σ`: the last factor moves to the front.
    pub fn sigma(&self) -> TensorElem {
        let mut out = Self::zero(&self.sig, self.arity);
        for (k, c) in &self.terms {
            let mut key = k.clone();
            let last = key.pop().unwrap();
            key.insert(0, last);
            out.add_term(key, c.clone());
        }
        out
    }

    pub fn sigma_pow(&self, n: usize) -> TensorElem {
        let mut t = self.clone();
        for _ in 0..(n % self.arity) {
            t = t.sigma();
        }
        t
    }

    /// The associative `•` product on `V⊗2`: `(a⊗b) • (c⊗d) = ac ⊗ db`.
    pub fn bullet(&self, other: &TensorElem) -> Result<TensorElem, AlgebraError> {
        self.check_match(other)?;
        if self.arity != 2 {
            return Err(AlgebraError::ArityMismatch { expected: 2, found: self.arity });
        }
        let mut out = Self::zero(&self.sig, 2);
        for (k1, c1) in &self.terms {
            for (k2, c2) in &other.terms {
                out.add_term(
                    vec![k1[0].concat(&k2[0]), k2[1].concat(&k1[1])],
                    c1.clone() * c2,
                );
            }
        }
        Ok(out)
    }

    /// The six `•ᵢ` module actions of `(V⊗2, •)` on `V⊗3`.
    pub fn bullet_i(
        a: &TensorElem,
        x: &TensorElem,
        i: usize,
        side: Side,
    ) -> Result<TensorElem, AlgebraError> {
        if a.sig != x.sig {
            return Err(AlgebraError::SignatureMismatch);
        }
        if a.arity != 2 {
            return Err(AlgebraError::ArityMismatch { expected: 2, found: a.arity });
        }
        if x.arity != 3 {
            return Err(AlgebraError::ArityMismatch { expected: 3, found: x.arity });
        }
        if !(1..=3).contains(&i) {
            return Err(AlgebraError::InvalidSlot { slot: i, arity: 3 });
        }
        let mut out = Self::zero(&a.sig, 3);
        for (ka, ca) in &a.terms {
            let (ap, app) = (&ka[0], &ka[1]);
            for (kx, cx) in &x.terms {
                let (x0, y0, z0) = (&kx[0], &kx[1], &kx[2]);
                let key = match (i, side) {
                    // A •₁ (x⊗y⊗z) = x ⊗ A'y ⊗ zA''
                    (1, Side::Left) => vec![x0.clone(), ap.concat(y0), z0.concat(app)],
                    // (x⊗y⊗z) •₁ A = x ⊗ yA' ⊗ A''z
                    (1, Side::Right) => vec![x0.clone(), y0.concat(ap), app.concat(z0)],
                    // A •₂ (x⊗y⊗z) = A'x ⊗ y ⊗ zA''
                    (2, Side::Left) => vec![ap.concat(x0), y0.clone(), z0.concat(app)],
                    // (x⊗y⊗z) •₂ A = xA' ⊗ y ⊗ A''z
                    (2, Side::Right) => vec![x0.concat(ap), y0.clone(), app.concat(z0)],
                    // A •₃ (x⊗y⊗z) = A'x ⊗ yA'' ⊗ z
                    (3, Side::Left) => vec![ap.concat(x0), y0.concat(app), z0.clone()],
                    // (x⊗y⊗z) •₃ A = xA' ⊗ A''y ⊗ z
                    (3, Side::Right) => vec![x0.concat(ap), app.concat(y0), z0.clone()],
                    _ => unreachable!(),
                };
                out.add_term(key, ca.clone() * cx);
            }
        }
        Ok(out)
    }

    /// Module actions and tensor insertions of a polynomial into a tensor.
    ///
    /// See [`InsertMode`] for the slot conventions. Module-action slots are
    /// reduced modulo the arity; `Outer`/`Inner` modes require arity 2 and
    /// ignore the slot.
    pub fn insert(
        &self,
        slot: usize,
        b: &NCPoly,
        mode: InsertMode,
    ) -> Result<TensorElem, AlgebraError> {
        if b.signature() != &self.sig {
            return Err(AlgebraError::SignatureMismatch);
        }
        let k = self.arity;
        use InsertMode::*;
        match mode {
            OuterL | OuterR | InnerL | InnerR => {
                if k != 2 {
                    let name = match mode {
                        OuterL => "OuterL",
                        OuterR => "OuterR",
                        InnerL => "InnerL",
                        _ => "InnerR",
                    };
                    return Err(AlgebraError::ModeNeedsArity2 { mode: name, arity: k });
                }
            }
            TensorLeft => {
                if slot > k - 1 {
                    return Err(AlgebraError::InvalidSlot { slot, arity: k });
                }
                if k + 1 > MAX_ARITY {
                    return Err(AlgebraError::ArityOutOfRange(k + 1));
                }
            }
            TensorRight => {
                if slot > k - 1 {
                    return Err(AlgebraError::InvalidSlot { slot, arity: k });
                }
                if k + 1 > MAX_ARITY {
                    return Err(AlgebraError::ArityOutOfRange(k + 1));
                }
            }
            MulLeft | MulRight => {}
        }
        let out_arity = match mode {
            TensorLeft | TensorRight => k + 1,
            _ => k,
        };
        let mut out = Self::zero(&self.sig, out_arity);
        for (key, c) in &self.terms {
            for (w, q) in b.terms() {
                let mut nk = key.clone();
                match mode {
                    MulLeft => {
                        let i = slot % k;
                        nk[i] = w.concat(&nk[i]);
                    }
                    MulRight => {
                        let i = k - 1 - (slot % k);
                        nk[i] = nk[i].concat(w);
                    }
                    TensorLeft => nk.insert(slot, w.clone()),
                    TensorRight => nk.insert(k - slot, w.clone()),
                    OuterL => nk[0] = w.concat(&nk[0]),
                    OuterR => nk[1] = nk[1].concat(w),
                    InnerL => nk[1] = w.concat(&nk[1]),
                    InnerR => nk[0] = nk[0].concat(w),
                }
                out.add_term(nk, c.clone() * q);
            }
        }
        Ok(out)
    }

    /// Concatenates all factors: the multiplication map `m: V⊗k → V`.
    pub fn mult(&self) -> NCPoly {
        let mut out = NCPoly::zero(&self.sig);
        for (key, c) in &self.terms {
            let mut w = Word::one();
            for part in key {
                w = w.concat(part);
            }
            out.add_term(w, c.clone());
        }
        out
    }

    /// Applies `∂/∂u_{var,shift}` in factor `slot` (1-based), splicing the
    /// two resulting factors into positions `slot`, `slot+1`.
    pub fn partial_at(
        &self,
        slot: usize,
        var: usize,
        shift: i64,
    ) -> Result<TensorElem, AlgebraError> {
        if slot == 0 || slot > self.arity {
            return Err(AlgebraError::InvalidSlot { slot, arity: self.arity });
        }
        if self.arity + 1 > MAX_ARITY {
            return Err(AlgebraError::ArityOutOfRange(self.arity + 1));
        }
        let shift = self.sig.reduce_shift(shift);
        let mut out = Self::zero(&self.sig, self.arity + 1);
        for (key, c) in &self.terms {
            let w = &key[slot - 1];
            for (pos, g) in w.0.iter().enumerate() {
                if g.var == var && g.shift == shift {
                    let mut nk = Vec::with_capacity(self.arity + 1);
                    nk.extend_from_slice(&key[..slot - 1]);
                    nk.push(Word(w.0[..pos].to_vec()));
                    nk.push(Word(w.0[pos + 1..].to_vec()));
                    nk.extend_from_slice(&key[slot..]);
                    out.add_term(nk, c.clone());
                }
            }
        }
        Ok(out)
    }

    /// Leftmost-factor derivation `(∂/∂u)_L`.
    pub fn partial_left(&self, var: usize, shift: i64) -> Result<TensorElem, AlgebraError> {
        self.partial_at(1, var, shift)
    }

    /// Rightmost-factor derivation `(∂/∂u)_R`.
    pub fn partial_right(&self, var: usize, shift: i64) -> Result<TensorElem, AlgebraError> {
        self.partial_at(self.arity, var, shift)
    }

    /// Component-wise shift automorphism `S^m`.
    pub fn shift(&self, m: i64) -> TensorElem {
        let mut out = Self::zero(&self.sig, self.arity);
        for (key, c) in &self.terms {
            out.add_term(key.iter().map(|w| w.shifted(&self.sig, m)).collect(), c.clone());
        }
        out
    }

    /// Combined support of all factors.
    pub fn support(&self) -> std::collections::BTreeSet<(usize, i64)> {
        let mut s = std::collections::BTreeSet::new();
        for key in self.terms.keys() {
            for w in key {
                for g in &w.0 {
                    s.insert((g.var, g.shift));
                }
            }
        }
        s
    }

    /// Sandwich action of an arity-2 tensor on a polynomial:
    /// `Σ A' p A''` (used by the vector action of difference operators).
    pub fn sandwich(&self, p: &NCPoly) -> Result<NCPoly, AlgebraError> {
        if self.arity != 2 {
            return Err(AlgebraError::ArityMismatch { expected: 2, found: self.arity });
        }
        if p.signature() != &self.sig {
            return Err(AlgebraError::SignatureMismatch);
        }
        let mut out = NCPoly::zero(&self.sig);
        for (key, c) in &self.terms {
            for (w, q) in p.terms() {
                out.add_term(key[0].concat(w).concat(&key[1]), c.clone() * q);
            }
        }
        Ok(out)
    }

    /// Splits an arity-1 tensor back into a polynomial.
    pub fn into_poly(&self) -> Result<NCPoly, AlgebraError> {
        if self.arity != 1 {
            return Err(AlgebraError::ArityMismatch { expected: 1, found: self.arity });
        }
        Ok(NCPoly::from_terms(
            &self.sig,
            self.terms.iter().map(|(k, c)| (k[0].clone(), c.clone())),
        ))
    }
}

impl fmt::Display for TensorElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (n, (key, c)) in self.terms.iter().enumerate() {
            let (neg, abs) = if crate::scalar::is_negative(c) {
                (true, -c.clone())
            } else {
                (false, c.clone())
            };
            if n == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            write!(f, "{}", fmt_q_factor(&abs))?;
            for (j, w) in key.iter().enumerate() {
                if j > 0 {
                    write!(f, "(x)")?;
                }
                let piece = format!("{}", WordInSig { w, sig: &self.sig });
                write!(f, "{}", piece)?;
            }
        }
        Ok(())
    }
}

struct WordInSig<'a> {
    w: &'a Word,
    sig: &'a AlgebraSignature,
}

impl fmt::Display for WordInSig<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.w.is_empty() {
            return write!(f, "1");
        }
        for (k, g) in self.w.0.iter().enumerate() {
            if k > 0 {
                write!(f, "*")?;
            }
            if g.shift == 0 {
                write!(f, "{}", self.sig.name(g.var))?;
            } else {
                write!(f, "{}[{}]", self.sig.name(g.var), g.shift)?;
            }
        }
        Ok(())
    }
}
