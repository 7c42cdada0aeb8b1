//! Sums of squares, quadratic modules and preorderings as explicit witnesses.
//!
//! A [`SosWitness`] of size `n` stores weighted squares `sum_i w_i A_i^T A_i`
//! with positive rational weights and `A_i` having `n` columns. A
//! [`PreorderWitness`] attaches one such sum to every product
//! `g^e = g_1^{e_1} ... g_m^{e_m}`, `e in {0,1}^m`, of the constraint
//! generators; restricting to `|e| <= 1` gives the quadratic module.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::gram::{gram_to_sos, psd_ldlt};
use crate::matpoly::{MatPoly, RatMatrix};
use crate::poly::{Monomial, Poly, RatPoint, Rational};

/// Upper limit on the number of constraint generators (`2^m` preordering blocks).
pub const MAX_CONSTRAINTS: usize = 8;

/// The generators `g_1, ..., g_m` of a basic closed semialgebraic set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstraintSet {
    nvars: usize,
    generators: Vec<Poly>,
}

impl ConstraintSet {
    pub fn new(nvars: usize, generators: Vec<Poly>) -> Result<Self> {
        if generators.len() > MAX_CONSTRAINTS {
            return Err(Error::TooManyConstraints { found: generators.len(), limit: MAX_CONSTRAINTS });
        }
        for (i, g) in generators.iter().enumerate() {
            if g.nvars() != nvars {
                return Err(Error::VarMismatch { left: nvars, right: g.nvars() });
            }
            if generators[..i].contains(g) {
                return Err(Error::MalformedWitness(format!("duplicate constraint {}", g)));
            }
        }
        Ok(ConstraintSet { nvars, generators })
    }

    pub fn empty(nvars: usize) -> Self {
        ConstraintSet { nvars, generators: Vec::new() }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn generators(&self) -> &[Poly] {
        &self.generators
    }

    /// `g^e`.
    pub fn product(&self, e: &ExponentVector) -> Poly {
        debug_assert_eq!(e.len(), self.len());
        let mut acc = Poly::one(self.nvars);
        for (g, &bit) in self.generators.iter().zip(e.bits()) {
            if bit {
                acc = &acc * g;
            }
        }
        acc
    }

    /// Exponent vectors of the preordering (`all = true`) or of the
    /// quadratic module (weight at most one), in ascending order.
    pub fn exponent_vectors(&self, all: bool) -> Vec<ExponentVector> {
        let m = self.len();
        if all {
            (0..(1usize << m)).map(|mask| ExponentVector::from_mask(m, mask)).collect::<BTreeSet<_>>().into_iter().collect()
        } else {
            std::iter::once(ExponentVector::zero(m))
                .chain((0..m).map(|i| ExponentVector::unit(m, i)))
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect()
        }
    }

    /// Whether `x` lies in `K_S`.
    pub fn contains(&self, x: &RatPoint) -> Result<bool> {
        for g in &self.generators {
            if g.eval(x.coords())?.is_negative() {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// A vector `e in {0,1}^m` selecting the product `g^e`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExponentVector(Vec<bool>);

impl ExponentVector {
    pub fn new(bits: Vec<bool>) -> Self {
        ExponentVector(bits)
    }

    pub fn zero(m: usize) -> Self {
        ExponentVector(vec![false; m])
    }

    pub fn unit(m: usize, i: usize) -> Self {
        let mut v = vec![false; m];
        v[i] = true;
        ExponentVector(v)
    }

    pub fn from_mask(m: usize, mask: usize) -> Self {
        ExponentVector((0..m).map(|i| mask >> i & 1 == 1).collect())
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn weight(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    pub fn is_zero(&self) -> bool {
        self.weight() == 0
    }

    pub fn xor(&self, other: &Self) -> Self {
        ExponentVector(self.0.iter().zip(&other.0).map(|(a, b)| a ^ b).collect())
    }

    pub fn and(&self, other: &Self) -> Self {
        ExponentVector(self.0.iter().zip(&other.0).map(|(a, b)| a & b).collect())
    }
}

impl fmt::Display for ExponentVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, b) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            f.write_str(if *b { "1" } else { "0" })?;
        }
        f.write_str("]")
    }
}

/// One weighted square `w * A^T A`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SquareTerm {
    pub weight: Rational,
    pub factor: MatPoly,
}

/// `sum_i w_i A_i^T A_i` with `w_i > 0`; every `A_i` has `n` columns.
/// The scalar case is `n = 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SosWitness {
    n: usize,
    nvars: usize,
    terms: Vec<SquareTerm>,
}

impl SosWitness {
    pub fn empty(n: usize, nvars: usize) -> Self {
        SosWitness { n, nvars, terms: Vec::new() }
    }

    /// `I_n` as the single square `1 * I_n^T I_n`.
    pub fn identity(n: usize, nvars: usize) -> Self {
        let mut w = Self::empty(n, nvars);
        w.terms.push(SquareTerm { weight: Rational::one(), factor: MatPoly::identity(n, nvars) });
        w
    }

    /// The scalar square `c * q^2`.
    pub fn scalar_square(weight: Rational, q: Poly) -> Result<Self> {
        let mut w = Self::empty(1, q.nvars());
        w.push(weight, MatPoly::from_poly(q))?;
        Ok(w)
    }

    pub fn from_terms(n: usize, nvars: usize, terms: Vec<(Rational, MatPoly)>) -> Result<Self> {
        let mut w = Self::empty(n, nvars);
        for (c, a) in terms {
            w.push(c, a)?;
        }
        Ok(w)
    }

    /// Appends `weight * factor^T factor`. Zero weights and zero factors are dropped.
    pub fn push(&mut self, weight: Rational, factor: MatPoly) -> Result<()> {
        if weight.is_negative() {
            return Err(Error::MalformedWitness(format!("negative weight {}", weight)));
        }
        if factor.cols() != self.n {
            return Err(Error::ShapeMismatch { op: "sos term", left: (self.n, self.n), right: factor.shape() });
        }
        if factor.nvars() != self.nvars {
            return Err(Error::VarMismatch { left: self.nvars, right: factor.nvars() });
        }
        if weight.is_zero() || factor.is_zero() {
            return Ok(());
        }
        self.terms.push(SquareTerm { weight, factor });
        Ok(())
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> &[SquareTerm] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn expand(&self) -> MatPoly {
        let mut acc = MatPoly::zeros(self.n, self.n, self.nvars);
        for t in &self.terms {
            acc.add_weighted_gram(&t.factor, &t.weight);
        }
        acc
    }

    pub fn add(&self, other: &SosWitness) -> Result<SosWitness> {
        if self.n != other.n {
            return Err(Error::ShapeMismatch { op: "sos add", left: (self.n, self.n), right: (other.n, other.n) });
        }
        if self.nvars != other.nvars {
            return Err(Error::VarMismatch { left: self.nvars, right: other.nvars });
        }
        let mut out = self.clone();
        out.terms.extend(other.terms.iter().cloned());
        Ok(out)
    }

    /// Multiplies every weight by `c >= 0`.
    pub fn scale(&self, c: &Rational) -> Result<SosWitness> {
        if c.is_negative() {
            return Err(Error::MalformedWitness(format!("negative scale {}", c)));
        }
        let mut out = Self::empty(self.n, self.nvars);
        for t in &self.terms {
            out.push(&t.weight * c, t.factor.clone())?;
        }
        Ok(out)
    }

    /// `A^T (sum w_i B_i^T B_i) A` as `sum w_i (B_i A)^T (B_i A)`. `A` is `n x k`.
    pub fn congruence(&self, a: &MatPoly) -> Result<SosWitness> {
        if a.rows() != self.n {
            return Err(Error::ShapeMismatch { op: "congruence", left: (self.n, self.n), right: a.shape() });
        }
        let mut out = Self::empty(a.cols(), self.nvars);
        for t in &self.terms {
            out.push(t.weight.clone(), t.factor.mul(a)?)?;
        }
        Ok(out)
    }

    /// Product of a scalar sum of squares `self` with a matrix sum of squares:
    /// `(a^T a)(B^T B) = (a (x) B)^T (a (x) B)`, each entry of `a` scaling a copy
    /// of `B`. `fold` multiplies every factor (a square folded into the terms).
    pub fn scalar_mul(&self, other: &SosWitness, fold: Option<&Poly>) -> Result<SosWitness> {
        if self.n != 1 {
            return Err(Error::ShapeMismatch { op: "scalar_mul", left: (self.n, self.n), right: (1, 1) });
        }
        if self.nvars != other.nvars {
            return Err(Error::VarMismatch { left: self.nvars, right: other.nvars });
        }
        let mut out = Self::empty(other.n, self.nvars);
        for ta in &self.terms {
            for tb in &other.terms {
                let mut blocks = Vec::with_capacity(ta.factor.rows() * tb.factor.rows());
                for r in 0..ta.factor.rows() {
                    let mut q = ta.factor.get(r, 0).clone();
                    if let Some(f) = fold {
                        q = &q * f;
                    }
                    if q.is_zero() {
                        continue;
                    }
                    blocks.push(tb.factor.scale_by_poly(&q)?);
                }
                if blocks.is_empty() {
                    continue;
                }
                out.push(&ta.weight * &tb.weight, stack_rows(&blocks))?;
            }
        }
        Ok(out)
    }

    /// Re-expresses the same sum through its Gram matrix over the monomials
    /// that occur in the factors, returning at most `#monomials * n` squares.
    /// Skipped unless there are at least twice as many squares. The
    /// expansion is unchanged.
    pub fn compact(&self) -> Result<SosWitness> {
        let n = self.n;
        let mut monos = BTreeSet::new();
        for t in &self.terms {
            for p in t.factor.entries() {
                for (m, _) in p.terms() {
                    monos.insert(m.clone());
                }
            }
        }
        let basis: Vec<Monomial> = monos.into_iter().collect();
        let index: BTreeMap<&Monomial, usize> = basis.iter().enumerate().map(|(i, m)| (m, i)).collect();
        let dim = basis.len() * n;
        let mut rows_total = 0;
        for t in &self.terms {
            rows_total += t.factor.rows();
        }
        // exact LDL^T cost grows quickly with dim; only worth it when the
        // number of squares at least halves
        if rows_total < 2 * dim {
            return Ok(self.clone());
        }
        let mut gram = RatMatrix::zeros(dim, dim);
        for t in &self.terms {
            for r in 0..t.factor.rows() {
                let mut coeffs: Vec<(usize, Rational)> = Vec::new();
                for c in 0..n {
                    for (m, v) in t.factor.get(r, c).terms() {
                        coeffs.push((index[m] * n + c, v.clone()));
                    }
                }
                for (i, vi) in &coeffs {
                    let wi = &t.weight * vi;
                    for (j, vj) in &coeffs {
                        gram.data[i * dim + j] += &wi * vj;
                    }
                }
            }
        }
        let compacted = gram_to_sos(&gram, &basis, n, self.nvars)?;
        Ok(if compacted.len() < self.len() { compacted } else { self.clone() })
    }
}

fn stack_rows(blocks: &[MatPoly]) -> MatPoly {
    let cols = blocks[0].cols();
    let nvars = blocks[0].nvars();
    let rows: usize = blocks.iter().map(MatPoly::rows).sum();
    let mut out = MatPoly::zeros(rows, cols, nvars);
    let mut r0 = 0;
    for b in blocks {
        for i in 0..b.rows() {
            for j in 0..cols {
                out.set(r0 + i, j, b.get(i, j).clone());
            }
        }
        r0 += b.rows();
    }
    out
}

/// An element of the matrix preordering `T_S^n`: one sum of squares per
/// exponent vector. With every exponent vector of weight at most one this is
/// an element of the quadratic module `M_S^n`.
#[derive(Clone, Debug)]
pub struct PreorderWitness {
    n: usize,
    constraints: Arc<ConstraintSet>,
    blocks: BTreeMap<ExponentVector, SosWitness>,
}

impl PartialEq for PreorderWitness {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && same_set(&self.constraints, &other.constraints) && self.blocks == other.blocks
    }
}

fn same_set(a: &Arc<ConstraintSet>, b: &Arc<ConstraintSet>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

impl PreorderWitness {
    pub fn empty(n: usize, constraints: Arc<ConstraintSet>) -> Self {
        PreorderWitness { n, constraints, blocks: BTreeMap::new() }
    }

    /// A pure sum of squares placed in the block `e = 0`.
    pub fn from_sos(constraints: Arc<ConstraintSet>, sos: SosWitness) -> Result<Self> {
        let mut w = Self::empty(sos.size(), constraints);
        w.add_block(ExponentVector::zero(w.constraints.len()), sos)?;
        Ok(w)
    }

    /// Adds `sos` into the block for `e`.
    pub fn add_block(&mut self, e: ExponentVector, sos: SosWitness) -> Result<()> {
        if e.len() != self.constraints.len() {
            return Err(Error::MalformedWitness(format!(
                "exponent vector {} has length {}, expected {}",
                e,
                e.len(),
                self.constraints.len()
            )));
        }
        if sos.size() != self.n {
            return Err(Error::ShapeMismatch { op: "block", left: (self.n, self.n), right: (sos.size(), sos.size()) });
        }
        if sos.nvars() != self.constraints.nvars() {
            return Err(Error::VarMismatch { left: self.constraints.nvars(), right: sos.nvars() });
        }
        if sos.is_empty() {
            return Ok(());
        }
        match self.blocks.get_mut(&e) {
            Some(b) => *b = b.add(&sos)?,
            None => {
                self.blocks.insert(e, sos);
            }
        }
        Ok(())
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn nvars(&self) -> usize {
        self.constraints.nvars()
    }

    pub fn constraints(&self) -> &Arc<ConstraintSet> {
        &self.constraints
    }

    pub fn blocks(&self) -> &BTreeMap<ExponentVector, SosWitness> {
        &self.blocks
    }

    pub fn block(&self, e: &ExponentVector) -> Option<&SosWitness> {
        self.blocks.get(e)
    }

    /// Total number of weighted squares.
    pub fn term_count(&self) -> usize {
        self.blocks.values().map(SosWitness::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Whether every exponent vector has weight at most one.
    pub fn is_qmodule(&self) -> bool {
        self.blocks.keys().all(|e| e.weight() <= 1)
    }

    pub fn expand(&self) -> MatPoly {
        let nvars = self.nvars();
        let mut acc = MatPoly::zeros(self.n, self.n, nvars);
        for (e, sos) in &self.blocks {
            let mut part = sos.expand();
            if !e.is_zero() {
                part = part.scale_by_poly(&self.constraints.product(e)).expect("nvars agree");
            }
            acc.add_assign_mat(&part);
        }
        acc
    }

    fn check_compatible(&self, other: &PreorderWitness) -> Result<()> {
        if !same_set(&self.constraints, &other.constraints) {
            return Err(Error::ConstraintMismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &PreorderWitness) -> Result<PreorderWitness> {
        self.check_compatible(other)?;
        if self.n != other.n {
            return Err(Error::ShapeMismatch { op: "witness add", left: (self.n, self.n), right: (other.n, other.n) });
        }
        let mut out = self.clone();
        for (e, sos) in &other.blocks {
            out.add_block(e.clone(), sos.clone())?;
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Rational) -> Result<PreorderWitness> {
        let mut out = Self::empty(self.n, self.constraints.clone());
        for (e, sos) in &self.blocks {
            out.add_block(e.clone(), sos.scale(c)?)?;
        }
        Ok(out)
    }

    /// `A^T w A` for `A` with `n` rows; the result has size `A.cols()`.
    pub fn congruence(&self, a: &MatPoly) -> Result<PreorderWitness> {
        if a.rows() != self.n {
            return Err(Error::ShapeMismatch { op: "congruence", left: (self.n, self.n), right: a.shape() });
        }
        let mut out = Self::empty(a.cols(), self.constraints.clone());
        for (e, sos) in &self.blocks {
            out.add_block(e.clone(), sos.congruence(a)?)?;
        }
        Ok(out)
    }

    /// Product of a scalar preordering element with a matrix one. Blocks
    /// combine as `g^e g^f = g^{e xor f} (g^{e and f})^2`, the square being
    /// folded into the factors.
    pub fn preorder_mul(scalar: &PreorderWitness, matrix: &PreorderWitness) -> Result<PreorderWitness> {
        scalar.check_compatible(matrix)?;
        if scalar.n != 1 {
            return Err(Error::ShapeMismatch { op: "preorder_mul", left: (scalar.n, scalar.n), right: (1, 1) });
        }
        let mut out = Self::empty(matrix.n, matrix.constraints.clone());
        for (e, ws) in &scalar.blocks {
            for (f, wm) in &matrix.blocks {
                let common = e.and(f);
                let fold = if common.is_zero() { None } else { Some(scalar.constraints.product(&common)) };
                out.add_block(e.xor(f), ws.scalar_mul(wm, fold.as_ref())?)?;
            }
        }
        Ok(out)
    }

    /// `I_n + w`.
    pub fn one_plus(&self) -> PreorderWitness {
        let mut out = self.clone();
        let m = self.constraints.len();
        out.add_block(ExponentVector::zero(m), SosWitness::identity(self.n, self.nvars()))
            .expect("identity block is well-formed");
        out
    }

    /// Inverse of [`one_plus`](Self::one_plus): removes one square `1 * I_n^T I_n`
    /// from the block `e = 0`.
    pub fn strip_identity(&self) -> Result<PreorderWitness> {
        let zero = ExponentVector::zero(self.constraints.len());
        let id = MatPoly::identity(self.n, self.nvars());
        let mut out = self.clone();
        let block = out
            .blocks
            .get_mut(&zero)
            .ok_or_else(|| Error::MalformedWitness("no identity square to remove".into()))?;
        let pos = block
            .terms
            .iter()
            .position(|t| t.weight.is_one() && t.factor == id)
            .ok_or_else(|| Error::MalformedWitness("no identity square to remove".into()))?;
        block.terms.remove(pos);
        if block.is_empty() {
            out.blocks.remove(&zero);
        }
        Ok(out)
    }

    /// Upper bound on the degree of the expansion read off the factors:
    /// `max 2 deg A + deg g^e` over all squares, without expanding.
    pub fn formal_degree(&self) -> u32 {
        self.blocks
            .iter()
            .flat_map(|(e, sos)| {
                let g = self.constraints.product(e).degree().unwrap_or(0);
                sos.terms().iter().map(move |t| 2 * t.factor.degree().unwrap_or(0) + g)
            })
            .max()
            .unwrap_or(0)
    }

    /// Gram re-factorization of every block; expansion is unchanged.
    pub fn compact(&self) -> Result<PreorderWitness> {
        let mut out = Self::empty(self.n, self.constraints.clone());
        for (e, sos) in &self.blocks {
            out.add_block(e.clone(), sos.compact()?)?;
        }
        Ok(out)
    }

    /// Exact check `expand(w) = p`.
    pub fn verify_membership(&self, p: &MatPoly) -> bool {
        p.shape() == (self.n, self.n) && p.nvars() == self.nvars() && self.expand() == *p
    }
}

/// A preordering witness restricted to exponent vectors of weight at most one.
#[derive(Clone, Debug, PartialEq)]
pub struct QModuleWitness(PreorderWitness);

impl QModuleWitness {
    pub fn new(w: PreorderWitness) -> Result<Self> {
        if w.is_qmodule() {
            Ok(QModuleWitness(w))
        } else {
            Err(Error::MalformedWitness("exponent vector of weight > 1 in quadratic module".into()))
        }
    }

    pub fn inner(&self) -> &PreorderWitness {
        &self.0
    }

    pub fn into_inner(self) -> PreorderWitness {
        self.0
    }

    pub fn add(&self, other: &QModuleWitness) -> Result<QModuleWitness> {
        Ok(QModuleWitness(self.0.add(&other.0)?))
    }

    pub fn congruence(&self, a: &MatPoly) -> Result<QModuleWitness> {
        Ok(QModuleWitness(self.0.congruence(a)?))
    }
}

/// Rational PSD test used by callers that evaluate an expansion at a point.
pub fn is_psd_at(m: &MatPoly, x: &RatPoint) -> Result<bool> {
    Ok(psd_ldlt(&m.eval(x)?).is_psd)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{rat, rat_int};

    fn x() -> Poly {
        Poly::var(1, 0)
    }

    fn sq(q: Poly) -> SosWitness {
        SosWitness::scalar_square(rat_int(1), q).unwrap()
    }

    fn s_x() -> Arc<ConstraintSet> {
        Arc::new(ConstraintSet::new(1, vec![x()]).unwrap())
    }

    #[test]
    fn expand_basic_cases() {
        let w = sq(x() - Poly::one(1));
        assert_eq!(w.expand(), MatPoly::from_poly(x().pow(2) - x().scale(&rat_int(2)) + Poly::one(1)));
        assert!(SosWitness::empty(2, 1).expand().is_zero());

        let s = s_x();
        let mut pw = PreorderWitness::empty(1, s.clone());
        pw.add_block(ExponentVector::unit(1, 0), sq(Poly::one(1))).unwrap();
        assert_eq!(pw.expand(), MatPoly::from_poly(x()));
    }

    #[test]
    fn add_and_identity() {
        let s = Arc::new(ConstraintSet::empty(1));
        let a = PreorderWitness::from_sos(s.clone(), sq(x())).unwrap();
        let b = PreorderWitness::from_sos(s.clone(), sq(Poly::one(1))).unwrap();
        let sum = a.add(&b).unwrap();
        assert_eq!(sum.expand(), MatPoly::from_poly(Poly::one(1) + x().pow(2)));
        assert_eq!(a.add(&PreorderWitness::empty(1, s)).unwrap().expand(), a.expand());
    }

    #[test]
    fn congruence_by_scalar_multiple_of_identity() {
        let s = Arc::new(ConstraintSet::empty(1));
        let w = PreorderWitness::from_sos(s, SosWitness::identity(2, 1)).unwrap();
        let two = MatPoly::scalar_diag(2, &Poly::from_int(1, 2));
        assert_eq!(w.congruence(&two).unwrap().expand(), MatPoly::scalar_diag(2, &Poly::from_int(1, 4)));
        assert_eq!(w.congruence(&MatPoly::identity(2, 1)).unwrap().expand(), w.expand());
        assert!(w.congruence(&MatPoly::identity(3, 1)).is_err());
    }

    #[test]
    fn preorder_mul_folds_common_square() {
        let s = s_x();
        let mut a = PreorderWitness::empty(1, s.clone());
        a.add_block(ExponentVector::unit(1, 0), sq(Poly::one(1) + x())).unwrap();
        let mut b = PreorderWitness::empty(1, s.clone());
        b.add_block(ExponentVector::unit(1, 0), sq(x())).unwrap();
        let prod = PreorderWitness::preorder_mul(&a, &b).unwrap();
        // g*g lands in block e = 0 with g folded into the factor
        assert!(prod.block(&ExponentVector::zero(1)).is_some());
        assert!(prod.block(&ExponentVector::unit(1, 0)).is_none());
        let expected = a.expand().mul(&b.expand()).unwrap();
        assert_eq!(prod.expand(), expected);

        let one = PreorderWitness::empty(1, s.clone()).one_plus();
        assert_eq!(PreorderWitness::preorder_mul(&one, &b).unwrap().expand(), b.expand());
    }

    #[test]
    fn preorder_mul_rejects_other_constraint_sets() {
        let a = PreorderWitness::empty(1, s_x()).one_plus();
        let other = Arc::new(ConstraintSet::new(1, vec![Poly::one(1) - x()]).unwrap());
        let b = PreorderWitness::empty(1, other).one_plus();
        assert_eq!(PreorderWitness::preorder_mul(&a, &b), Err(Error::ConstraintMismatch));
    }

    #[test]
    fn one_plus_and_strip() {
        let s = s_x();
        let e = PreorderWitness::empty(3, s.clone());
        assert_eq!(e.one_plus().expand(), MatPoly::identity(3, 1));
        let mut u1 = PreorderWitness::empty(1, s.clone());
        u1.add_block(ExponentVector::unit(1, 0), sq(x())).unwrap();
        let one_plus = u1.one_plus();
        assert_eq!(one_plus.expand().sub(&u1.expand()).unwrap(), MatPoly::identity(1, 1));
        assert_eq!(one_plus.strip_identity().unwrap().expand(), u1.expand());
        assert!(u1.strip_identity().is_err());
    }

    #[test]
    fn membership_verification() {
        let s = Arc::new(ConstraintSet::empty(1));
        let w = PreorderWitness::from_sos(s, sq(x())).unwrap();
        assert!(w.verify_membership(&MatPoly::from_poly(x().pow(2))));
        assert!(!w.verify_membership(&MatPoly::from_poly(x().pow(2) + Poly::one(1))));
        assert!(!w.verify_membership(&MatPoly::identity(2, 1)));
    }

    #[test]
    fn negative_weights_rejected() {
        let mut w = SosWitness::empty(1, 1);
        assert!(w.push(rat(-1, 2), MatPoly::from_poly(x())).is_err());
        assert!(w.push(rat(1, 2), MatPoly::identity(2, 1)).is_err());
    }

    #[test]
    fn qmodule_weight_bound() {
        let s = Arc::new(ConstraintSet::new(1, vec![x(), Poly::one(1) - x()]).unwrap());
        let mut w = PreorderWitness::empty(1, s.clone());
        w.add_block(ExponentVector::unit(2, 1), sq(x())).unwrap();
        let q = QModuleWitness::new(w.clone()).unwrap();
        assert!(q.add(&q).unwrap().inner().is_qmodule());
        let a = MatPoly::from_rows(vec![vec![x(), Poly::one(1)]]).unwrap();
        assert_eq!(q.congruence(&a).unwrap().inner().size(), 2);
        w.add_block(ExponentVector::new(vec![true, true]), sq(x())).unwrap();
        assert!(QModuleWitness::new(w).is_err());
    }

    #[test]
    fn compact_preserves_expansion() {
        let mut w = SosWitness::empty(2, 1);
        for k in 0..6 {
            let a = MatPoly::from_rows(vec![vec![x().pow(k % 3), Poly::from_int(1, k as i64) - x()]]).unwrap();
            w.push(rat(k as i64 + 1, 3), a).unwrap();
        }
        let c = w.compact().unwrap();
        assert!(c.len() <= w.len());
        assert_eq!(c.expand(), w.expand());
    }

    #[test]
    fn constraint_limits() {
        let gens: Vec<Poly> = (0..9).map(|k| x() + Poly::from_int(1, k)).collect();
        assert!(matches!(ConstraintSet::new(1, gens), Err(Error::TooManyConstraints { .. })));
        assert!(ConstraintSet::new(1, vec![x(), x()]).is_err());
        let s = ConstraintSet::new(1, vec![x(), Poly::one(1) - x()]).unwrap();
        assert_eq!(s.exponent_vectors(true).len(), 4);
        assert_eq!(s.exponent_vectors(false).len(), 3);
        assert!(s.contains(&RatPoint::new(vec![rat(1, 2)])).unwrap());
        assert!(!s.contains(&RatPoint::new(vec![rat(3, 2)])).unwrap());
    }
}
