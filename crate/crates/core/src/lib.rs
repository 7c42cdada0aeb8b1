//! Exact Positivstellensatz certificates for symmetric matrix polynomials that
//! are positive definite on a basic closed semialgebraic set.
//!
//! A certificate for `F` on `K_S = {x : g_1(x) >= 0, ..., g_m(x) >= 0}` is a
//! pair `(t, V)` with `t` in the preordering `T_S` and `V` in its matrix
//! analogue `T_S^n` such that `(1 + t) F = I_n + V` holds as an identity of
//! polynomial matrices with rational coefficients.

pub mod cli;
pub mod error;
pub mod format;
pub mod gram;
pub mod lemma;
pub mod matpoly;
pub mod parse;
pub mod poly;
pub mod scalar;
pub mod schur;
pub mod witness;

pub use error::{Error, Result};
pub use matpoly::{MatPoly, RatMatrix};
pub use poly::{Monomial, Poly, RatPoint, Rational};
pub use witness::{ConstraintSet, ExponentVector, PreorderWitness, QModuleWitness, SosWitness};
