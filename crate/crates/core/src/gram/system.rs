//! Gram-matrix parametrization of preordering membership as an affine system.

use std::collections::BTreeMap;
use std::sync::{Arc, OnceLock};

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::matpoly::{MatPoly, RatMatrix};
use crate::poly::{Monomial, Poly, Rational};
use crate::witness::{ConstraintSet, ExponentVector, PreorderWitness, SosWitness};

use super::ldlt::gram_to_sos;
use super::project::ExactProjector;

/// Which exponent vectors get a Gram block.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// All of `{0,1}^m` (the preordering `T_S^n`).
    Preorder,
    /// Weight at most one (the quadratic module `M_S^n`).
    QModule,
}

/// One unknown PSD Gram matrix `G` contributing `multiplier * M^T G M` to the
/// system, `M = basis (x) I_n` with row `a * n + r` for basis monomial `a` and
/// matrix row `r`. Only the rows listed in `active` are free; the others are
/// fixed to zero.
#[derive(Clone, Debug, PartialEq)]
pub struct GramBlock {
    pub exponent: ExponentVector,
    pub multiplier: Poly,
    pub basis: Vec<Monomial>,
    pub n: usize,
    pub active: Vec<usize>,
}

impl GramBlock {
    pub fn new(exponent: ExponentVector, multiplier: Poly, basis: Vec<Monomial>, n: usize) -> Self {
        let active = (0..basis.len() * n).collect();
        GramBlock { exponent, multiplier, basis, n, active }
    }

    /// Size of the free part of `G`.
    pub fn dim(&self) -> usize {
        self.active.len()
    }

    pub fn full_dim(&self) -> usize {
        self.basis.len() * self.n
    }

    /// Embeds a free-part matrix into the full `G` with zeros elsewhere.
    pub fn embed(&self, g: &RatMatrix) -> RatMatrix {
        let k = self.full_dim();
        let mut out = RatMatrix::zeros(k, k);
        for (i, &fi) in self.active.iter().enumerate() {
            for (j, &fj) in self.active.iter().enumerate() {
                out.set(fi, fj, g.get(i, j).clone());
            }
        }
        out
    }

    pub fn nvars_upper(&self) -> usize {
        let k = self.dim();
        k * (k + 1) / 2
    }
}

/// Row key: target entry `(r, s)` with `r <= s` and a monomial.
pub type RowKey = (usize, usize, Monomial);

/// Structure shared by every target with the same blocks.
#[derive(Debug)]
pub(crate) struct Structure {
    pub nvars: usize,
    pub n: usize,
    pub blocks: Vec<GramBlock>,
    pub offsets: Vec<usize>,
    pub num_vars: usize,
    pub rows: Vec<RowKey>,
    pub row_index: BTreeMap<RowKey, usize>,
    /// Sparse rows of the constraint matrix over upper-triangular Gram entries.
    pub a: Vec<Vec<(usize, Rational)>>,
    pub projector: OnceLock<std::result::Result<Arc<ExactProjector>, Error>>,
}

/// `sum_b multiplier_b * M_b^T G_b M_b = target`, entrywise and coefficientwise.
#[derive(Clone, Debug)]
pub struct GramSystem {
    pub(crate) structure: Arc<Structure>,
    pub(crate) target: MatPoly,
    pub(crate) b: Vec<Rational>,
}

/// Position of upper-triangular entry `(i, j)`, `i <= j`, in a `k x k` block.
pub(crate) fn upper_index(k: usize, i: usize, j: usize) -> usize {
    debug_assert!(i <= j && j < k);
    i * k - i * (i + 1) / 2 + j
}

impl GramSystem {
    /// Builds the system for arbitrary blocks. All blocks must share `n` with
    /// the square target.
    pub fn new(target: &MatPoly, blocks: Vec<GramBlock>) -> Result<GramSystem> {
        if target.rows() != target.cols() {
            return Err(Error::NotSquare(target.rows(), target.cols()));
        }
        if !target.is_symmetric()? {
            return Err(Error::NotSymmetric);
        }
        let n = target.rows();
        let nvars = target.nvars();
        let mut offsets = Vec::with_capacity(blocks.len());
        let mut num_vars = 0;
        let mut entries: BTreeMap<RowKey, Vec<(usize, Rational)>> = BTreeMap::new();
        for blk in &blocks {
            if blk.n != n {
                return Err(Error::ShapeMismatch { op: "gram block", left: (n, n), right: (blk.n, blk.n) });
            }
            offsets.push(num_vars);
            let k = blk.dim();
            for i in 0..k {
                for j in i..k {
                    let var = num_vars + upper_index(k, i, j);
                    let (fi, fj) = (blk.active[i], blk.active[j]);
                    let (a, r) = (fi / n, fi % n);
                    let (b, s) = (fj / n, fj % n);
                    let base = blk.basis[a].mul(&blk.basis[b]);
                    let factor = if i != j && r == s { Rational::from_integer(2.into()) } else { Rational::from_integer(1.into()) };
                    let (lo, hi) = (r.min(s), r.max(s));
                    for (m, c) in blk.multiplier.terms() {
                        entries.entry((lo, hi, base.mul(m))).or_default().push((var, c * &factor));
                    }
                }
            }
            num_vars += blk.nvars_upper();
        }
        for r in 0..n {
            for s in r..n {
                for (m, _) in target.get(r, s).terms() {
                    entries.entry((r, s, m.clone())).or_default();
                }
            }
        }
        let mut rows = Vec::with_capacity(entries.len());
        let mut a = Vec::with_capacity(entries.len());
        for (key, mut coeffs) in entries {
            coeffs.sort_by_key(|(v, _)| *v);
            let mut merged: Vec<(usize, Rational)> = Vec::with_capacity(coeffs.len());
            for (v, c) in coeffs {
                match merged.last_mut() {
                    Some((lv, lc)) if *lv == v => *lc += c,
                    _ => merged.push((v, c)),
                }
            }
            merged.retain(|(_, c)| !c.is_zero());
            rows.push(key);
            a.push(merged);
        }
        let row_index = rows.iter().cloned().enumerate().map(|(i, k)| (k, i)).collect();
        let structure = Arc::new(Structure {
            nvars,
            n,
            blocks,
            offsets,
            num_vars,
            rows,
            row_index,
            a,
            projector: OnceLock::new(),
        });
        let b = rhs(&structure, target)?;
        let sys = GramSystem { structure, target: target.clone(), b };
        for (i, row) in sys.structure.a.iter().enumerate() {
            if row.is_empty() && !sys.b[i].is_zero() {
                let (r, s, m) = &sys.structure.rows[i];
                return Err(Error::DegreeTooSmall(format!(
                    "no Gram entry reaches monomial {} in entry ({}, {})",
                    Poly::monomial(m.clone(), Rational::from_integer(1.into())),
                    r,
                    s
                )));
            }
        }
        if sys.structure.num_vars == 0 {
            return Err(Error::DegreeTooSmall("no monomials available".into()));
        }
        Ok(sys)
    }

    /// Same target with the given free rows (indices into each block's
    /// current free part) removed.
    pub fn restrict(&self, drop: &[Vec<usize>]) -> Result<GramSystem> {
        let blocks = self
            .structure
            .blocks
            .iter()
            .zip(drop)
            .map(|(blk, d)| {
                let mut b = blk.clone();
                b.active = blk.active.iter().enumerate().filter(|(i, _)| !d.contains(i)).map(|(_, &f)| f).collect();
                b
            })
            .collect();
        GramSystem::new(&self.target, blocks)
    }

    /// Same blocks, new right-hand side.
    pub fn retarget(&self, target: &MatPoly) -> Result<GramSystem> {
        if target.shape() != self.target.shape() {
            return Err(Error::ShapeMismatch { op: "retarget", left: self.target.shape(), right: target.shape() });
        }
        let b = rhs(&self.structure, target)?;
        Ok(GramSystem { structure: self.structure.clone(), target: target.clone(), b })
    }

    pub fn target(&self) -> &MatPoly {
        &self.target
    }

    pub fn blocks(&self) -> &[GramBlock] {
        &self.structure.blocks
    }

    pub fn num_vars(&self) -> usize {
        self.structure.num_vars
    }

    pub fn num_rows(&self) -> usize {
        self.structure.rows.len()
    }

    pub fn rows(&self) -> &[RowKey] {
        &self.structure.rows
    }

    pub fn rhs(&self) -> &[Rational] {
        &self.b
    }

    pub fn nvars(&self) -> usize {
        self.structure.nvars
    }

    pub(crate) fn sparse_rows(&self) -> &[Vec<(usize, Rational)>] {
        &self.structure.a
    }

    pub(crate) fn offset(&self, block: usize) -> usize {
        self.structure.offsets[block]
    }

    pub(crate) fn projector(&self) -> Result<Arc<ExactProjector>> {
        self.structure
            .projector
            .get_or_init(|| ExactProjector::new(self).map(Arc::new))
            .clone()
    }

    /// Residual `A x - b` for exact upper-triangular block entries.
    pub fn residual(&self, x: &[Rational]) -> Vec<Rational> {
        self.structure
            .a
            .iter()
            .zip(&self.b)
            .map(|(row, bi)| {
                let mut acc = -bi.clone();
                for (v, c) in row {
                    acc += c * &x[*v];
                }
                acc
            })
            .collect()
    }

    /// Unpacks an exact variable vector into full symmetric block matrices.
    pub fn unpack(&self, x: &[Rational]) -> Vec<RatMatrix> {
        self.structure
            .blocks
            .iter()
            .zip(&self.structure.offsets)
            .map(|(blk, &off)| {
                let k = blk.dim();
                let mut m = RatMatrix::zeros(k, k);
                for i in 0..k {
                    for j in i..k {
                        let v = x[off + upper_index(k, i, j)].clone();
                        m.set(j, i, v.clone());
                        m.set(i, j, v);
                    }
                }
                m
            })
            .collect()
    }

    /// Converts exact PSD blocks into per-block weighted squares.
    pub fn blocks_to_sos(&self, mats: &[RatMatrix]) -> Result<Vec<SosWitness>> {
        self.structure
            .blocks
            .iter()
            .zip(mats)
            .map(|(blk, g)| gram_to_sos(&blk.embed(g), &blk.basis, blk.n, self.structure.nvars))
            .collect()
    }
}

fn rhs(st: &Structure, target: &MatPoly) -> Result<Vec<Rational>> {
    let mut b = vec![Rational::zero(); st.rows.len()];
    for r in 0..st.n {
        for s in r..st.n {
            for (m, c) in target.get(r, s).terms() {
                let key = (r, s, m.clone());
                match st.row_index.get(&key) {
                    Some(&i) => b[i] = c.clone(),
                    None => {
                        return Err(Error::DegreeTooSmall(format!(
                            "target monomial {} in entry ({}, {}) is unreachable",
                            Poly::monomial(m.clone(), Rational::from_integer(1.into())),
                            r,
                            s
                        )))
                    }
                }
            }
        }
    }
    Ok(b)
}

/// Blocks for membership of `target` in `T_S^n` or `M_S^n`: one block per
/// selected exponent vector, multiplier `g^e`, basis of all monomials of
/// degree at most `degree_bound / 2` (so every SOS multiplier has degree at
/// most `degree_bound`).
pub fn build_gram_system(target: &MatPoly, constraints: &ConstraintSet, mode: Mode, degree_bound: u32) -> Result<GramSystem> {
    let n = target.rows();
    let basis = Monomial::all_up_to(constraints.nvars(), degree_bound / 2);
    let blocks = constraints
        .exponent_vectors(mode == Mode::Preorder)
        .into_iter()
        .map(|e| GramBlock::new(e.clone(), constraints.product(&e), basis.clone(), n))
        .collect();
    GramSystem::new(target, blocks)
}

/// Assembles a preordering witness from the per-block sums of squares of a
/// system built by [`build_gram_system`].
pub fn witness_from_blocks(sys: &GramSystem, constraints: Arc<ConstraintSet>, sos: Vec<SosWitness>) -> Result<PreorderWitness> {
    let mut w = PreorderWitness::empty(sys.structure.n, constraints);
    for (blk, s) in sys.structure.blocks.iter().zip(sos) {
        w.add_block(blk.exponent.clone(), s)?;
    }
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::rat_int;

    fn x() -> Poly {
        Poly::var(1, 0)
    }

    fn exact_solution_satisfies(sys: &GramSystem, mats: &[RatMatrix]) -> bool {
        let mut xs = vec![Rational::zero(); sys.num_vars()];
        for (bi, m) in mats.iter().enumerate() {
            let k = m.rows;
            for i in 0..k {
                for j in i..k {
                    xs[sys.offset(bi) + upper_index(k, i, j)] = m.get(i, j).clone();
                }
            }
        }
        sys.residual(&xs).iter().all(Zero::is_zero)
    }

    #[test]
    fn upper_indexing_is_dense() {
        let k = 4;
        let mut seen = Vec::new();
        for i in 0..k {
            for j in i..k {
                seen.push(upper_index(k, i, j));
            }
        }
        assert_eq!(seen, (0..10).collect::<Vec<_>>());
    }

    #[test]
    fn one_plus_x_squared() {
        let target = MatPoly::from_poly(Poly::one(1) + x().pow(2));
        let sys = build_gram_system(&target, &ConstraintSet::empty(1), Mode::Preorder, 2).unwrap();
        assert_eq!(sys.blocks().len(), 1);
        assert_eq!(sys.blocks()[0].basis.len(), 2);
        assert!(exact_solution_satisfies(&sys, &[RatMatrix::identity(2)]));
    }

    #[test]
    fn qmodule_degree_zero() {
        let s = ConstraintSet::new(1, vec![x()]).unwrap();
        let sys = build_gram_system(&MatPoly::from_poly(x()), &s, Mode::QModule, 0).unwrap();
        assert_eq!(sys.blocks().len(), 2);
        assert!(sys.blocks().iter().all(|b| b.basis.len() == 1));
        let zero = RatMatrix::zeros(1, 1);
        let one = RatMatrix::identity(1);
        assert!(exact_solution_satisfies(&sys, &[zero, one]));
    }

    #[test]
    fn handelman_block() {
        let one = Poly::one(1);
        let s = ConstraintSet::new(1, vec![x(), &one - &x()]).unwrap();
        let target = MatPoly::from_poly(Poly::from_int(1, 2) + x() - x().pow(2));
        let sys = build_gram_system(&target, &s, Mode::Preorder, 2).unwrap();
        assert_eq!(sys.blocks().len(), 4);
        // 2 * 1^2 in block 00 plus 1 * x(1-x) in block 11
        let mut mats = Vec::new();
        for blk in sys.blocks() {
            let mut g = RatMatrix::zeros(2, 2);
            if blk.exponent.weight() == 0 {
                g.set(0, 0, rat_int(2));
            } else if blk.exponent.weight() == 2 {
                g.set(0, 0, rat_int(1));
            }
            mats.push(g);
        }
        assert!(exact_solution_satisfies(&sys, &mats));
    }

    #[test]
    fn degree_too_small() {
        let target = MatPoly::from_poly(x().pow(4));
        let err = build_gram_system(&target, &ConstraintSet::empty(1), Mode::Preorder, 2).unwrap_err();
        assert!(matches!(err, Error::DegreeTooSmall(_)));
    }

    #[test]
    fn matrix_targets_use_entrywise_rows() {
        let f = MatPoly::from_rows(vec![
            vec![Poly::one(1) + x().pow(2), x()],
            vec![x(), Poly::from_int(1, 2)],
        ])
        .unwrap();
        let sys = build_gram_system(&f, &ConstraintSet::empty(1), Mode::Preorder, 2).unwrap();
        assert_eq!(sys.blocks()[0].dim(), 4);
        assert!(sys.rows().iter().all(|(r, s, _)| r <= s));
    }
}
