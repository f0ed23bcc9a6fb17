//! The representation functor `V ↦ V_N`.
//!
//! `V_N` is the commutative algebra on symbols `a_{rc}` (`1 ≤ r,c ≤ N`) with
//! `1_{rc} = δ_{rc}` and `(ab)_{rc} = Σ_k a_{rk} b_{kc}`. A double
//! multiplicative λ-bracket on `V` induces a multiplicative λ-bracket on
//! `V_N` by
//! `{a_{ij} λ b_{kl}} = Σₙ (aₙb)'_{kj} (aₙb)''_{il} λⁿ`,
//! extended to all of `V_N` by the commutative analogue of the Master
//! Formula over the generators `u_{i,n,rc}`.

use crate::bracket::BracketSpec;
use crate::diffop::LaurentTensor;
use crate::ncalg::{AlgebraSignature, NCPoly, Word};
use crate::scalar::{fmt_q, fmt_q_factor, Q};
use num::{One, Zero};
use rayon::prelude::*;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

/// A commutative generator: matrix entry `(row, col)` of `u_{var, shift}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RepGen {
    pub var: usize,
    pub shift: i64,
    pub row: u16,
    pub col: u16,
}

/// A commutative monomial: sorted generators with positive exponents.
pub type RepMonomial = Vec<(RepGen, u32)>;

/// A commutative polynomial in the matrix-entry coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommPoly {
    sig: Arc<AlgebraSignature>,
    terms: BTreeMap<RepMonomial, Q>,
}

impl CommPoly {
    pub fn zero(sig: &Arc<AlgebraSignature>) -> Self {
        CommPoly { sig: Arc::clone(sig), terms: BTreeMap::new() }
    }

    pub fn constant(sig: &Arc<AlgebraSignature>, c: Q) -> Self {
        let mut p = Self::zero(sig);
        p.add_term(Vec::new(), c);
        p
    }

    pub fn one(sig: &Arc<AlgebraSignature>) -> Self {
        Self::constant(sig, Q::one())
    }

    pub fn gen(sig: &Arc<AlgebraSignature>, g: RepGen) -> Self {
        let g = RepGen { shift: sig.reduce_shift(g.shift), ..g };
        let mut p = Self::zero(sig);
        p.add_term(vec![(g, 1)], Q::one());
        p
    }

    pub fn signature(&self) -> &Arc<AlgebraSignature> {
        &self.sig
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&RepMonomial, &Q)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &RepMonomial) -> Q {
        self.terms.get(m).cloned().unwrap_or_else(Q::zero)
    }

    fn add_term(&mut self, m: RepMonomial, c: Q) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                let s = e.get().clone() + c;
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    pub fn add(&self, other: &CommPoly) -> CommPoly {
        assert_eq!(self.sig, other.sig, "signature mismatch");
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &CommPoly) -> CommPoly {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> CommPoly {
        self.scale(&-Q::one())
    }

    pub fn scale(&self, c: &Q) -> CommPoly {
        if c.is_zero() {
            return Self::zero(&self.sig);
        }
        CommPoly {
            sig: Arc::clone(&self.sig),
            terms: self.terms.iter().map(|(m, q)| (m.clone(), q.clone() * c)).collect(),
        }
    }

    pub fn mul(&self, other: &CommPoly) -> CommPoly {
        assert_eq!(self.sig, other.sig, "signature mismatch");
        let mut out = Self::zero(&self.sig);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out.add_term(merge_monomials(m1, m2), c1.clone() * c2);
            }
        }
        out
    }

    /// Shift automorphism `S^m` (entrywise on matrix coordinates).
    pub fn shift(&self, m: i64) -> CommPoly {
        let mut out = Self::zero(&self.sig);
        for (mon, c) in &self.terms {
            let mut nm: RepMonomial = mon
                .iter()
                .map(|(g, e)| (RepGen { shift: self.sig.reduce_shift(g.shift + m), ..*g }, *e))
                .collect();
            nm.sort();
            out.add_term(nm, c.clone());
        }
        out
    }

    /// Commutative partial derivative with respect to a generator.
    pub fn partial(&self, g: RepGen) -> CommPoly {
        let g = RepGen { shift: self.sig.reduce_shift(g.shift), ..g };
        let mut out = Self::zero(&self.sig);
        for (mon, c) in &self.terms {
            if let Some(pos) = mon.iter().position(|(x, _)| *x == g) {
                let e = mon[pos].1;
                let mut nm = mon.clone();
                if e == 1 {
                    nm.remove(pos);
                } else {
                    nm[pos].1 = e - 1;
                }
                out.add_term(nm, c.clone() * Q::from_integer(e.into()));
            }
        }
        out
    }

    /// Generators occurring in this polynomial.
    pub fn support(&self) -> BTreeSet<RepGen> {
        let mut s = BTreeSet::new();
        for mon in self.terms.keys() {
            for (g, _) in mon {
                s.insert(*g);
            }
        }
        s
    }
}

fn merge_monomials(a: &RepMonomial, b: &RepMonomial) -> RepMonomial {
    let mut map: BTreeMap<RepGen, u32> = BTreeMap::new();
    for (g, e) in a.iter().chain(b.iter()) {
        *map.entry(*g).or_insert(0) += e;
    }
    map.into_iter().collect()
}

impl fmt::Display for CommPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (n, (mon, c)) in self.terms.iter().enumerate() {
            let (neg, abs) =
                if crate::scalar::is_negative(c) { (true, -c.clone()) } else { (false, c.clone()) };
            if n == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            if mon.is_empty() {
                write!(f, "{}", fmt_q(&abs))?;
            } else {
                write!(f, "{}", fmt_q_factor(&abs))?;
                for (k, (g, e)) in mon.iter().enumerate() {
                    if k > 0 {
                        write!(f, "*")?;
                    }
                    write!(f, "{}[{}]_{}{}", self.sig.name(g.var), g.shift, g.row + 1, g.col + 1)?;
                    if *e > 1 {
                        write!(f, "^{}", e)?;
                    }
                }
            }
        }
        Ok(())
    }
}

/// The matrix image `X(f)` of a difference polynomial under the `N`-th
/// representation functor: `N×N` matrix of commutative polynomials.
pub fn rep_matrix(f: &NCPoly, n: u16) -> Vec<Vec<CommPoly>> {
    let sig = f.signature();
    let nn = n as usize;
    let mut out = vec![vec![CommPoly::zero(sig); nn]; nn];
    for (w, c) in f.terms() {
        let m = rep_word(sig, w, n);
        for (r, row) in m.iter().enumerate() {
            for (col, p) in row.iter().enumerate() {
                out[r][col] = out[r][col].add(&p.scale(c));
            }
        }
    }
    out
}

fn rep_word(sig: &Arc<AlgebraSignature>, w: &Word, n: u16) -> Vec<Vec<CommPoly>> {
    let nn = n as usize;
    let mut acc: Vec<Vec<CommPoly>> = (0..nn)
        .map(|r| {
            (0..nn)
                .map(|c| if r == c { CommPoly::one(sig) } else { CommPoly::zero(sig) })
                .collect()
        })
        .collect();
    for g in &w.0 {
        let mut next = vec![vec![CommPoly::zero(sig); nn]; nn];
        #[allow(clippy::needless_range_loop)]
        for r in 0..nn {
            for c in 0..nn {
                let mut s = CommPoly::zero(sig);
                for k in 0..nn {
                    if acc[r][k].is_zero() {
                        continue;
                    }
                    let entry = CommPoly::gen(
                        sig,
                        RepGen { var: g.var, shift: g.shift, row: k as u16, col: c as u16 },
                    );
                    s = s.add(&acc[r][k].mul(&entry));
                }
                next[r][c] = s;
            }
        }
        acc = next;
    }
    acc
}

/// A Laurent polynomial in λ with commutative coefficients.
pub type CommLaurent = BTreeMap<i64, CommPoly>;

fn cl_add_term(out: &mut CommLaurent, sig: &Arc<AlgebraSignature>, e: i64, p: CommPoly) {
    if p.is_zero() {
        return;
    }
    let e = sig.reduce_exp(e);
    use std::collections::btree_map::Entry;
    match out.entry(e) {
        Entry::Vacant(v) => {
            v.insert(p);
        }
        Entry::Occupied(mut o) => {
            let s = o.get().add(&p);
            if s.is_zero() {
                o.remove();
            } else {
                *o.get_mut() = s;
            }
        }
    }
}

/// The induced multiplicative λ-bracket on `V_N`, stored on the shift-0
/// generator pairs.
#[derive(Debug, Clone)]
pub struct CommBracketSpec {
    sig: Arc<AlgebraSignature>,
    pub n: u16,
    /// `((var_a, row_a, col_a), (var_b, row_b, col_b)) ↦ {a λ b}`.
    data: BTreeMap<((usize, u16, u16), (usize, u16, u16)), CommLaurent>,
}

impl CommBracketSpec {
    pub fn signature(&self) -> &Arc<AlgebraSignature> {
        &self.sig
    }

    /// Generators of `V_N` at shift 0, in sorted order.
    pub fn generators(&self) -> Vec<RepGen> {
        let mut v = Vec::new();
        for var in 0..self.sig.num_vars() {
            for row in 0..self.n {
                for col in 0..self.n {
                    v.push(RepGen { var, shift: 0, row, col });
                }
            }
        }
        v
    }

    /// `{x λ y}` on arbitrary shifted generators through sesquilinearity:
    /// `{S^m(a) λ S^n(b)} = λ^{n-m} Sⁿ {a λ b}`.
    pub fn gen_bracket(&self, x: RepGen, y: RepGen) -> CommLaurent {
        let key = ((x.var, x.row, x.col), (y.var, y.row, y.col));
        let base = match self.data.get(&key) {
            Some(b) => b,
            None => return BTreeMap::new(),
        };
        let mut out = BTreeMap::new();
        for (p, coeff) in base {
            cl_add_term(&mut out, &self.sig, p + y.shift - x.shift, coeff.shift(y.shift));
        }
        out
    }

    /// Commutative Master Formula:
    /// `{f λ g} = Σ λ^{n+p-m} (∂g/∂x_{ν,n}) Sⁿ(k_p) S^{n+p-m}(∂f/∂x_{κ,m})`.
    pub fn eval(&self, f: &CommPoly, g: &CommPoly) -> CommLaurent {
        let mut out = BTreeMap::new();
        for gy in g.support() {
            let dg = g.partial(gy);
            if dg.is_zero() {
                continue;
            }
            let y0 = RepGen { shift: 0, ..gy };
            for gx in f.support() {
                let df = f.partial(gx);
                if df.is_zero() {
                    continue;
                }
                let x0 = RepGen { shift: 0, ..gx };
                let key = ((x0.var, x0.row, x0.col), (y0.var, y0.row, y0.col));
                let base = match self.data.get(&key) {
                    Some(b) => b,
                    None => continue,
                };
                for (p, k_p) in base {
                    let e = gy.shift + p - gx.shift;
                    let term = dg.mul(&k_p.shift(gy.shift)).mul(&df.shift(e));
                    cl_add_term(&mut out, &self.sig, e, term);
                }
            }
        }
        out
    }

    /// `{P(λ)_{λμ} c}` for a λ-Laurent `P`: each coefficient is bracketed
    /// against `c` with the fresh variable sent to λμ.
    pub fn eval_composite(
        &self,
        p_la: &CommLaurent,
        c: &CommPoly,
    ) -> BTreeMap<(i64, i64), CommPoly> {
        let mut out: BTreeMap<(i64, i64), CommPoly> = BTreeMap::new();
        for (p, coeff) in p_la {
            let inner = self.eval(coeff, c);
            for (r, val) in inner {
                let key = (self.sig.reduce_exp(p + r), self.sig.reduce_exp(r));
                let entry = out.entry(key).or_insert_with(|| CommPoly::zero(&self.sig));
                *entry = entry.add(&val);
            }
        }
        out.retain(|_, v| !v.is_zero());
        out
    }
}

/// Builds the induced bracket on generator pairs:
/// `{u_{i,0,ab} λ u_{j,0,cd}} = Σₙ (hₙ)'_{cb} (hₙ)''_{ad} λⁿ` where
/// `{{u_i λ u_j}} = Σₙ hₙ λⁿ`.
pub fn induce_bracket(spec: &BracketSpec, n: u16) -> CommBracketSpec {
    let sig = Arc::clone(spec.signature());
    let l = sig.num_vars();
    let mut data = BTreeMap::new();
    for i in 0..l {
        for j in 0..l {
            let h = spec.gen_bracket(i, j);
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        for d in 0..n {
                            let mut laurent: CommLaurent = BTreeMap::new();
                            for (e, t) in h.terms() {
                                let mut acc = CommPoly::zero(&sig);
                                for (key, q) in t.terms() {
                                    // (h')_{cb} (h'')_{ad}
                                    let left =
                                        rep_word(&sig, &key[0], n)[c as usize][b as usize].clone();
                                    if left.is_zero() {
                                        continue;
                                    }
                                    let right =
                                        rep_word(&sig, &key[1], n)[a as usize][d as usize].clone();
                                    acc = acc.add(&left.mul(&right).scale(q));
                                }
                                cl_add_term(&mut laurent, &sig, e[0], acc);
                            }
                            if !laurent.is_empty() {
                                data.insert(((i, a, b), (j, c, d)), laurent);
                            }
                        }
                    }
                }
            }
        }
    }
    CommBracketSpec { sig, n, data }
}

/// Index extraction `A_{i₁j₁,i₂j₂,i₃j₃} = a'_{i₁j₁} a''_{i₂j₂} a'''_{i₃j₃}`
/// of an arity-3 Laurent tensor, as a map `(λ,μ)-exponent ↦ CommPoly`.
pub fn extract_indices3(
    t: &LaurentTensor,
    n: u16,
    idx: [(u16, u16); 3],
) -> BTreeMap<(i64, i64), CommPoly> {
    let sig = Arc::clone(t.signature());
    let mut out: BTreeMap<(i64, i64), CommPoly> = BTreeMap::new();
    for (e, coeff) in t.terms() {
        let mut acc = CommPoly::zero(&sig);
        for (key, q) in coeff.terms() {
            let f1 = rep_word(&sig, &key[0], n)[idx[0].0 as usize][idx[0].1 as usize].clone();
            if f1.is_zero() {
                continue;
            }
            let f2 = rep_word(&sig, &key[1], n)[idx[1].0 as usize][idx[1].1 as usize].clone();
            if f2.is_zero() {
                continue;
            }
            let f3 = rep_word(&sig, &key[2], n)[idx[2].0 as usize][idx[2].1 as usize].clone();
            acc = acc.add(&f1.mul(&f2).mul(&f3).scale(q));
        }
        if !acc.is_zero() {
            let key = (e[0], e[1]);
            let entry = out.entry(key).or_insert_with(|| CommPoly::zero(&sig));
            *entry = entry.add(&acc);
        }
    }
    out.retain(|_, v| !v.is_zero());
    out
}

/// A failing axiom instance on `V_N`.
#[derive(Debug, Clone)]
pub enum CommAxiomFailure {
    Skew { x: RepGen, y: RepGen },
    Jacobi { x: RepGen, y: RepGen, z: RepGen },
}

impl fmt::Display for CommAxiomFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CommAxiomFailure::Skew { x, y } => {
                write!(f, "skew ({},{},{})/({},{},{})", x.var, x.row, x.col, y.var, y.row, y.col)
            }
            CommAxiomFailure::Jacobi { x, y, z } => write!(
                f,
                "jacobi ({},{},{})/({},{},{})/({},{},{})",
                x.var, x.row, x.col, y.var, y.row, y.col, z.var, z.row, z.col
            ),
        }
    }
}

/// Verifies skewsymmetry on generator pairs and the Jacobi identity on
/// generator triples of `V_N`, exactly. Triples run in parallel; the
/// report is deterministic.
pub fn check_commutative_mpva(cspec: &CommBracketSpec) -> (bool, Vec<CommAxiomFailure>) {
    let gens = cspec.generators();
    let sig = &cspec.sig;
    let mut failures = Vec::new();
    // skewsymmetry: {x λ y} = -Σ λ^{-m} S^{-m}(k'_m) where {y λ x} = Σ k'_m λ^m
    for &x in &gens {
        for &y in &gens {
            let xy = cspec.gen_bracket(x, y);
            let yx = cspec.gen_bracket(y, x);
            let mut mirrored: CommLaurent = BTreeMap::new();
            for (m, coeff) in &yx {
                cl_add_term(&mut mirrored, sig, -m, coeff.shift(-m).neg());
            }
            if xy != mirrored {
                failures.push(CommAxiomFailure::Skew { x, y });
            }
        }
    }
    // Jacobi on triples
    let mut triples = Vec::new();
    for &x in &gens {
        for &y in &gens {
            for &z in &gens {
                triples.push((x, y, z));
            }
        }
    }
    let jac: Vec<CommAxiomFailure> = triples
        .par_iter()
        .filter_map(|&(x, y, z)| {
            if comm_jacobi_defect(cspec, x, y, z).is_empty() {
                None
            } else {
                Some(CommAxiomFailure::Jacobi { x, y, z })
            }
        })
        .collect();
    failures.extend(jac);
    (failures.is_empty(), failures)
}

/// `{x λ {y μ z}} − {y μ {x λ z}} − {{x λ y}_{λμ} z}` on generators of `V_N`.
pub fn comm_jacobi_defect(
    cspec: &CommBracketSpec,
    x: RepGen,
    y: RepGen,
    z: RepGen,
) -> BTreeMap<(i64, i64), CommPoly> {
    let sig = &cspec.sig;
    let px = CommPoly::gen(sig, x);
    let py = CommPoly::gen(sig, y);
    let pz = CommPoly::gen(sig, z);
    comm_jacobi_defect_polys(cspec, &px, &py, &pz)
}

/// Same defect on arbitrary commutative polynomials.
pub fn comm_jacobi_defect_polys(
    cspec: &CommBracketSpec,
    px: &CommPoly,
    py: &CommPoly,
    pz: &CommPoly,
) -> BTreeMap<(i64, i64), CommPoly> {
    let sig = &cspec.sig;
    let mut total: BTreeMap<(i64, i64), CommPoly> = BTreeMap::new();
    let mut add = |key: (i64, i64), p: &CommPoly, positive: bool| {
        if p.is_zero() {
            return;
        }
        let q = if positive { p.clone() } else { p.neg() };
        let entry = total.entry(key).or_insert_with(|| CommPoly::zero(sig));
        *entry = entry.add(&q);
    };
    // {x λ {y μ z}}
    for (q, inner) in cspec.eval(py, pz) {
        for (p, val) in cspec.eval(px, &inner) {
            add((p, q), &val, true);
        }
    }
    // -{y μ {x λ z}}
    for (p, inner) in cspec.eval(px, pz) {
        for (q, val) in cspec.eval(py, &inner) {
            add((p, q), &val, false);
        }
    }
    // -{{x λ y}_{λμ} z}
    let xy = cspec.eval(px, py);
    for (key, val) in cspec.eval_composite(&xy, pz) {
        add(key, &val, false);
    }
    total.retain(|_, v| !v.is_zero());
    total
}

/// `Σᵢ X(f)ᵢᵢ`, canonicalised modulo a uniform shift: every monomial is
/// translated so that its minimal shift index is 0 (in finite-order mode,
/// the least among the `e` translates is taken).
pub fn trace_functional(f: &NCPoly, n: u16) -> CommPoly {
    let sig = f.signature();
    let m = rep_matrix(f, n);
    let mut tr = CommPoly::zero(sig);
    for (i, row) in m.iter().enumerate() {
        tr = tr.add(&row[i]);
    }
    canonicalize_mod_shift(&tr)
}

/// Canonical representative of a commutative polynomial modulo `(S−1)`.
pub fn canonicalize_mod_shift(p: &CommPoly) -> CommPoly {
    let sig = p.signature();
    let mut out = CommPoly::zero(sig);
    for (mon, c) in p.terms() {
        out.add_term(canonical_monomial(sig, mon), c.clone());
    }
    out
}

fn canonical_monomial(sig: &Arc<AlgebraSignature>, mon: &RepMonomial) -> RepMonomial {
    if mon.is_empty() {
        return Vec::new();
    }
    let translate = |mon: &RepMonomial, d: i64| -> RepMonomial {
        let mut v: Vec<(RepGen, u32)> = mon
            .iter()
            .map(|(g, e)| (RepGen { shift: sig.reduce_shift(g.shift + d), ..*g }, *e))
            .collect();
        v.sort();
        v
    };
    match sig.order() {
        crate::ncalg::ShiftOrder::Infinite => {
            let min = mon.iter().map(|(g, _)| g.shift).min().unwrap();
            translate(mon, -min)
        }
        crate::ncalg::ShiftOrder::Finite(e) => (0..e as i64).map(|d| translate(mon, d)).min().unwrap(),
    }
}
