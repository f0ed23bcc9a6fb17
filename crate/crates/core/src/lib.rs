//! Exact-arithmetic engine for double multiplicative λ-brackets on free
//! noncommutative difference algebras.
//!
//! The library is organised around a handful of layers:
//!
//! * [`ncalg`] — the free difference algebra `R_ℓ` over exact rationals:
//!   words, polynomials, the shift automorphism `S` and 2-fold partial
//!   derivatives.
//! * [`tensor`] — tensor powers `V⊗k` (k ≤ 4) with the permutation `σ`,
//!   bimodule actions, insertion products, the `•` product and its module
//!   actions on `V⊗3`.
//! * [`diffop`] — Laurent polynomials in formal variables and the algebra of
//!   matrix difference operators with `V⊗V` coefficients.
//! * [`bracket`] — the double multiplicative λ-bracket engine: Master
//!   Formula evaluation, axiom checkers, the lattice correspondence and the
//!   one- and two-variable classification verifiers.
//! * [`rep`] — the representation functor `V ↦ V_N` and the induced
//!   commutative multiplicative λ-bracket.
//! * [`hamiltonian`] — local functionals, variational derivatives,
//!   Hamiltonian flows and the variational complex.
//! * [`rational`] — the rational/nonlocal layer handled through truncated
//!   series with explicit validity windows.
//!
//! All values are immutable after construction and all operations are pure,
//! so everything here can be shared freely across threads.

pub mod bracket;
pub mod diffop;
pub mod error;
pub mod hamiltonian;
pub mod ncalg;
pub mod rational;
pub mod rep;
pub mod scalar;
pub mod tensor;

pub use error::AlgebraError;
pub use scalar::Q;
