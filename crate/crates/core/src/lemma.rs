//! Uniform bounds `c I_n - B^T B` in the matrix sums of squares.
//!
//! For every polynomial matrix `B` this module produces `k > 0`, `l >= 0` and
//! an explicit witness that `k p^l I_n - B^T B` is a sum of squares, where
//! `p = 1 + x_1^2 + ... + x_d^2`. The construction follows the structure of
//! `B`: constants and single variables are bounded directly, and bounds are
//! combined through sums (parallelogram identity) and products.

use std::fmt;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::gram::{gram_to_sos, psd_ldlt};
use crate::matpoly::{MatPoly, RatMatrix};
use crate::poly::{Monomial, Poly, Rational};
use crate::witness::SosWitness;

/// Expression tree over constant matrices and scalar variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExprTree {
    Const(RatMatrix),
    /// `x_index * I_size`.
    Var { index: usize, size: usize },
    Sum(Box<ExprTree>, Box<ExprTree>),
    Product(Box<ExprTree>, Box<ExprTree>),
}

impl ExprTree {
    pub fn shape(&self) -> (usize, usize) {
        match self {
            ExprTree::Const(c) => (c.rows, c.cols),
            ExprTree::Var { size, .. } => (*size, *size),
            ExprTree::Sum(a, _) => a.shape(),
            ExprTree::Product(a, b) => (a.shape().0, b.shape().1),
        }
    }

    pub fn flatten(&self, nvars: usize) -> MatPoly {
        match self {
            ExprTree::Const(c) => MatPoly::from_rat(c, nvars),
            ExprTree::Var { index, size } => MatPoly::scalar_diag(*size, &Poly::var(nvars, *index)),
            ExprTree::Sum(a, b) => a.flatten(nvars).add(&b.flatten(nvars)).expect("sum shapes agree"),
            ExprTree::Product(a, b) => a.flatten(nvars).mul(&b.flatten(nvars)).expect("product shapes agree"),
        }
    }
}

impl fmt::Display for ExprTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExprTree::Const(c) => {
                let m = MatPoly::from_rat(c, 0);
                write!(f, "Const({})", m)
            }
            ExprTree::Var { index, .. } => write!(f, "Var({})", index + 1),
            ExprTree::Sum(a, b) => write!(f, "Sum({}, {})", a, b),
            ExprTree::Product(a, b) => write!(f, "Product({}, {})", a, b),
        }
    }
}

/// Writes `B` as a sum over its monomials `x^a C_a`, each monomial a nested
/// product of variable leaves in index order ending in the coefficient matrix.
/// Terms appear in descending graded-lex order and are combined as a balanced
/// binary tree of sums.
pub fn decompose(b: &MatPoly) -> ExprTree {
    let (rows, cols) = b.shape();
    let mut monos: Vec<Monomial> = b
        .entries()
        .iter()
        .flat_map(|p| p.terms().map(|(m, _)| m.clone()))
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    monos.reverse();
    if monos.is_empty() {
        return ExprTree::Const(RatMatrix::zeros(rows, cols));
    }
    let terms: Vec<ExprTree> = monos
        .iter()
        .map(|m| {
            let mut c = RatMatrix::zeros(rows, cols);
            for i in 0..rows {
                for j in 0..cols {
                    c.set(i, j, b.get(i, j).coeff(m));
                }
            }
            let mut node = ExprTree::Const(c);
            for (idx, &e) in m.exponents().iter().enumerate().rev() {
                for _ in 0..e {
                    node = ExprTree::Product(Box::new(ExprTree::Var { index: idx, size: rows }), Box::new(node));
                }
            }
            node
        })
        .collect();
    balanced_sum(terms)
}

fn balanced_sum(mut terms: Vec<ExprTree>) -> ExprTree {
    if terms.len() == 1 {
        return terms.pop().unwrap();
    }
    let right = terms.split_off(terms.len() / 2);
    ExprTree::Sum(Box::new(balanced_sum(terms)), Box::new(balanced_sum(right)))
}

/// `p = 1 + sum_i x_i^2`.
pub fn archimedean_poly(nvars: usize) -> Poly {
    let mut p = Poly::one(nvars);
    for i in 0..nvars {
        p = p + Poly::var(nvars, i).pow(2);
    }
    p
}

/// Scalar witness for `p^j`: `(p^{j/2})^2` for even `j`, otherwise
/// `(p^h)^2 + sum_i (x_i p^h)^2` with `h = (j - 1) / 2`.
pub fn p_power_sos(nvars: usize, j: u32) -> SosWitness {
    let p = archimedean_poly(nvars);
    let h = p.pow(j / 2);
    let mut w = SosWitness::empty(1, nvars);
    w.push(Rational::one(), MatPoly::from_poly(h.clone())).expect("scalar");
    if j % 2 == 1 {
        for i in 0..nvars {
            w.push(Rational::one(), MatPoly::from_poly(&Poly::var(nvars, i) * &h)).expect("scalar");
        }
    }
    w
}

/// Scalar witness for `p^delta - 1 = (sum_i x_i^2)(1 + p + ... + p^{delta-1})`.
pub fn p_power_minus_one_sos(nvars: usize, delta: u32) -> SosWitness {
    let mut w = SosWitness::empty(1, nvars);
    for j in 0..delta {
        let pj = p_power_sos(nvars, j);
        for i in 0..nvars {
            let xi = Poly::var(nvars, i);
            for t in pj.terms() {
                w.push(t.weight.clone(), t.factor.scale_by_poly(&xi).expect("nvars")).expect("scalar");
            }
        }
    }
    w
}

/// `expand(sos) = k p^l I_n - B^T B` for the stored `B` (`n` = columns of `B`).
#[derive(Clone, Debug, PartialEq)]
pub struct BoundWitness {
    pub k: Rational,
    pub l: u32,
    pub b: MatPoly,
    pub sos: SosWitness,
}

impl BoundWitness {
    /// The scalar `c = k p^l`.
    pub fn c(&self) -> Poly {
        archimedean_poly(self.b.nvars()).pow(self.l).scale(&self.k)
    }

    /// Scalar sum-of-squares witness for `c`.
    pub fn c_sos(&self) -> SosWitness {
        p_power_sos(self.b.nvars(), self.l).scale(&self.k).expect("k > 0")
    }

    /// Exact check of the defining identity.
    pub fn verify(&self) -> bool {
        let n = self.b.cols();
        let lhs = self.sos.expand().add(&self.b.gram()).expect("shapes");
        lhs == MatPoly::scalar_diag(n, &self.c())
    }
}

/// `k = 1 + ||C||_F^2`, `l = 0`; the witness comes from the rational LDL^T of
/// the positive definite `k I - C^T C`.
pub fn bound_constant(c: &RatMatrix, nvars: usize) -> Result<BoundWitness> {
    let mut k = Rational::one();
    for v in &c.data {
        k += v * v;
    }
    let n = c.cols;
    let mut m = c.transpose().mul(c);
    for v in m.data.iter_mut() {
        *v = -v.clone();
    }
    for i in 0..n {
        let d = m.get(i, i) + &k;
        m.set(i, i, d);
    }
    let sos = gram_to_sos(&m, &[Monomial::one(nvars)], n, nvars)?;
    Ok(BoundWitness { k, l: 0, b: MatPoly::from_rat(c, nvars), sos })
}

/// `B = x_index I_size`: `p - x_i^2 = 1 + sum_{j != i} x_j^2`, so `k = 1`, `l = 1`.
pub fn bound_variable(index: usize, size: usize, nvars: usize) -> Result<BoundWitness> {
    if index >= nvars {
        return Err(Error::VarIndex { index, nvars });
    }
    let mut sos = SosWitness::empty(size, nvars);
    sos.push(Rational::one(), MatPoly::identity(size, nvars))?;
    for j in (0..nvars).filter(|&j| j != index) {
        sos.push(Rational::one(), MatPoly::scalar_diag(size, &Poly::var(nvars, j)))?;
    }
    Ok(BoundWitness {
        k: Rational::one(),
        l: 1,
        b: MatPoly::scalar_diag(size, &Poly::var(nvars, index)),
        sos,
    })
}

/// `k p^L I - B^T B = p^D (k p^l I - B^T B) + (p^D - 1) B^T B` with `D = L - l`.
fn raise_level(w: &BoundWitness, level: u32) -> Result<SosWitness> {
    let delta = level - w.l;
    if delta == 0 {
        return Ok(w.sos.clone());
    }
    let nvars = w.b.nvars();
    let lifted = p_power_sos(nvars, delta).scalar_mul(&w.sos, None)?;
    let bb = SosWitness::from_terms(w.b.cols(), nvars, vec![(Rational::one(), w.b.clone())])?;
    let extra = p_power_minus_one_sos(nvars, delta).scalar_mul(&bb, None)?;
    lifted.add(&extra)
}

/// Parallelogram identity:
/// `2(k1+k2) p^L I - (B1+B2)^T(B1+B2)
///   = (B1-B2)^T(B1-B2) + 2(k1 p^L I - B1^T B1) + 2(k2 p^L I - B2^T B2)`.
pub fn bound_sum(w1: &BoundWitness, w2: &BoundWitness) -> Result<BoundWitness> {
    if w1.b.shape() != w2.b.shape() {
        return Err(Error::ShapeMismatch { op: "bound_sum", left: w1.b.shape(), right: w2.b.shape() });
    }
    let level = w1.l.max(w2.l);
    let two = Rational::from_integer(2.into());
    let n = w1.b.cols();
    let nvars = w1.b.nvars();
    let mut sos = SosWitness::empty(n, nvars);
    sos.push(Rational::one(), w1.b.sub(&w2.b)?)?;
    let sos = sos
        .add(&raise_level(w1, level)?.scale(&two)?)?
        .add(&raise_level(w2, level)?.scale(&two)?)?;
    Ok(BoundWitness {
        k: &two * (&w1.k + &w2.k),
        l: level,
        b: w1.b.add(&w2.b)?,
        sos,
    })
}

/// `k1 k2 p^{l1+l2} I - (B1 B2)^T (B1 B2)
///   = B2^T (k1 p^{l1} I - B1^T B1) B2 + k1 p^{l1} (k2 p^{l2} I - B2^T B2)`.
pub fn bound_product(w1: &BoundWitness, w2: &BoundWitness) -> Result<BoundWitness> {
    if w1.b.cols() != w2.b.rows() {
        return Err(Error::ShapeMismatch { op: "bound_product", left: w1.b.shape(), right: w2.b.shape() });
    }
    let first = w1.sos.congruence(&w2.b)?;
    let second = w1.c_sos().scalar_mul(&w2.sos, None)?;
    Ok(BoundWitness {
        k: &w1.k * &w2.k,
        l: w1.l + w2.l,
        b: w1.b.mul(&w2.b)?,
        sos: first.add(&second)?,
    })
}

fn is_identity(c: &RatMatrix) -> bool {
    c.rows == c.cols && c.data.iter().enumerate().all(|(i, v)| if i / c.cols == i % c.cols { v.is_one() } else { v.is_zero() })
}

fn bound_tree(t: &ExprTree, nvars: usize) -> Result<BoundWitness> {
    let w = match t {
        ExprTree::Const(c) => return bound_constant(c, nvars),
        ExprTree::Var { index, size } => return bound_variable(*index, *size, nvars),
        // an identity coefficient adds nothing to the variable chain
        ExprTree::Product(a, b) if matches!(b.as_ref(), ExprTree::Const(c) if is_identity(c)) => return bound_tree(a, nvars),
        ExprTree::Sum(a, b) => bound_sum(&bound_tree(a, nvars)?, &bound_tree(b, nvars)?)?,
        ExprTree::Product(a, b) => bound_product(&bound_tree(a, nvars)?, &bound_tree(b, nvars)?)?,
    };
    let sos = w.sos.compact()?;
    Ok(BoundWitness { sos, ..w })
}

/// Bound for an arbitrary `B`, by recursion over [`decompose`].
pub fn lemma_bound(b: &MatPoly) -> Result<BoundWitness> {
    let tree = decompose(b);
    let mut w = bound_tree(&tree, b.nvars())?;
    // the tree reproduces B exactly; keep the caller's matrix as the bounded one
    debug_assert_eq!(w.b, *b);
    w.b = b.clone();
    Ok(w)
}

/// Smallest pivot of `k I - C^T C` (diagnostics for constant bounds).
pub fn constant_margin(c: &RatMatrix) -> Rational {
    let k: Rational = Rational::one() + c.data.iter().map(|v| v * v).fold(Rational::zero(), |a, b| a + b);
    let mut m = c.transpose().mul(c);
    for v in m.data.iter_mut() {
        *v = -v.clone();
    }
    for i in 0..c.cols {
        let d = m.get(i, i) + &k;
        m.set(i, i, d);
    }
    psd_ldlt(&m).min_pivot()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{rat, rat_int};

    fn cm(rows: Vec<Vec<i64>>) -> RatMatrix {
        RatMatrix::from_rows(rows.into_iter().map(|r| r.into_iter().map(rat_int).collect()).collect())
    }

    #[test]
    fn decompose_shapes() {
        let c2 = MatPoly::from_poly(Poly::from_int(1, 2));
        assert_eq!(decompose(&c2), ExprTree::Const(cm(vec![vec![2]])));

        let x = MatPoly::from_poly(Poly::var(1, 0));
        assert_eq!(
            decompose(&x),
            ExprTree::Product(Box::new(ExprTree::Var { index: 0, size: 1 }), Box::new(ExprTree::Const(cm(vec![vec![1]]))))
        );

        let b = MatPoly::from_poly(Poly::var(2, 0) * Poly::var(2, 1) + Poly::from_int(2, 3));
        let t = decompose(&b);
        assert_eq!(t.to_string(), "Sum(Product(Var(1), Product(Var(2), Const([[1]]))), Const([[3]]))");
        assert_eq!(t.flatten(2), b);
    }

    #[test]
    fn constant_bounds() {
        let w = bound_constant(&cm(vec![vec![2]]), 1).unwrap();
        assert_eq!(w.k, rat_int(5));
        assert_eq!(w.sos.expand(), MatPoly::from_poly(Poly::one(1)));
        assert!(w.verify());

        let w = bound_constant(&RatMatrix::zeros(2, 2), 1).unwrap();
        assert_eq!(w.k, rat_int(1));
        assert_eq!(w.sos.expand(), MatPoly::identity(2, 1));

        let w = bound_constant(&cm(vec![vec![1, 1], vec![0, 1]]), 1).unwrap();
        assert_eq!(w.k, rat_int(4));
        let weights: Vec<Rational> = w.sos.terms().iter().map(|t| t.weight.clone()).collect();
        assert_eq!(weights, vec![rat_int(3), rat(5, 3)]);
        assert!(w.verify());
    }

    #[test]
    fn variable_bounds() {
        let w = bound_variable(0, 1, 1).unwrap();
        assert_eq!(w.sos.expand(), MatPoly::from_poly(Poly::one(1)));
        assert_eq!(w.sos.len(), 1);

        let w = bound_variable(0, 1, 2).unwrap();
        assert_eq!(w.sos.expand(), MatPoly::from_poly(Poly::one(2) + Poly::var(2, 1).pow(2)));

        let w = bound_variable(1, 1, 3).unwrap();
        assert_eq!(w.sos.expand(), MatPoly::from_poly(Poly::one(3) + Poly::var(3, 0).pow(2) + Poly::var(3, 2).pow(2)));
        assert!(w.verify());

        assert_eq!(bound_variable(3, 1, 3), Err(Error::VarIndex { index: 3, nvars: 3 }));
    }

    #[test]
    fn sum_and_product_rules() {
        let v = bound_variable(0, 1, 1).unwrap();
        let s = bound_sum(&v, &v).unwrap();
        assert_eq!((s.k.clone(), s.l), (rat_int(4), 1));
        assert_eq!(s.sos.expand(), MatPoly::from_poly(Poly::from_int(1, 4)));
        assert!(s.verify());

        let z = bound_constant(&RatMatrix::zeros(1, 1), 1).unwrap();
        assert!(bound_sum(&v, &z).unwrap().verify());

        let p = bound_product(&v, &v).unwrap();
        assert_eq!((p.k.clone(), p.l), (rat_int(1), 2));
        assert!(p.verify());

        let b1 = bound_product(&bound_variable(0, 2, 1).unwrap(), &bound_constant(&cm(vec![vec![1, 2], vec![0, 1]]), 1).unwrap()).unwrap();
        let id = bound_constant(&RatMatrix::identity(2), 1).unwrap();
        let with_id = bound_product(&b1, &id).unwrap();
        assert_eq!(with_id.l, b1.l);
        assert_eq!(with_id.k, &b1.k * rat_int(3));
        assert!(with_id.verify());

        let zero = bound_constant(&RatMatrix::zeros(1, 1), 1).unwrap();
        let zp = bound_product(&zero, &v).unwrap();
        assert!(zp.b.is_zero());
        assert_eq!(zp.sos.expand(), MatPoly::from_poly(zp.c()));
    }

    #[test]
    fn single_variable_matrix_gives_p() {
        let g = MatPoly::from_poly(Poly::var(1, 0));
        let w = lemma_bound(&g).unwrap();
        assert_eq!((w.k.clone(), w.l), (rat_int(1), 1));
        assert_eq!(w.c(), Poly::one(1) + Poly::var(1, 0).pow(2));
        assert_eq!(w.sos.expand(), MatPoly::from_poly(Poly::one(1)));
    }

    #[test]
    fn p_power_helpers() {
        for d in 1..=3 {
            let p = archimedean_poly(d);
            for j in 0..=6 {
                assert_eq!(p_power_sos(d, j).expand(), MatPoly::from_poly(p.pow(j)));
                assert_eq!(p_power_minus_one_sos(d, j).expand(), MatPoly::from_poly(p.pow(j) - Poly::one(d)));
            }
        }
    }

    #[test]
    fn constant_margin_positive() {
        assert!(constant_margin(&cm(vec![vec![3, -4], vec![1, 0]])) > rat_int(0));
    }
}
