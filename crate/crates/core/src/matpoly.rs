//! Dense matrices of polynomials and of rationals.

use std::fmt;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::poly::{default_names, to_f64, IntPoly, Poly, RatPoint, Rational};

/// Row-major dense matrix with polynomial entries sharing one variable count.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MatPoly {
    rows: usize,
    cols: usize,
    nvars: usize,
    entries: Vec<Poly>,
}

impl MatPoly {
    pub fn zeros(rows: usize, cols: usize, nvars: usize) -> Self {
        MatPoly { rows, cols, nvars, entries: vec![Poly::zero(nvars); rows * cols] }
    }

    pub fn identity(n: usize, nvars: usize) -> Self {
        Self::scalar_diag(n, &Poly::one(nvars))
    }

    /// `p * I_n`.
    pub fn scalar_diag(n: usize, p: &Poly) -> Self {
        let mut m = Self::zeros(n, n, p.nvars());
        for i in 0..n {
            m.entries[i * n + i] = p.clone();
        }
        m
    }

    /// The 1x1 matrix `[p]`.
    pub fn from_poly(p: Poly) -> Self {
        MatPoly { rows: 1, cols: 1, nvars: p.nvars(), entries: vec![p] }
    }

    pub fn from_rows(rows: Vec<Vec<Poly>>) -> Result<Self> {
        let r = rows.len();
        if r == 0 {
            return Err(Error::MalformedWitness("matrix with no rows".into()));
        }
        let c = rows[0].len();
        if c == 0 {
            return Err(Error::MalformedWitness("matrix with no columns".into()));
        }
        let nvars = rows[0][0].nvars();
        let mut entries = Vec::with_capacity(r * c);
        for row in rows {
            if row.len() != c {
                return Err(Error::ShapeMismatch { op: "from_rows", left: (r, c), right: (r, row.len()) });
            }
            for p in row {
                if p.nvars() != nvars {
                    return Err(Error::VarMismatch { left: nvars, right: p.nvars() });
                }
                entries.push(p);
            }
        }
        Ok(MatPoly { rows: r, cols: c, nvars, entries })
    }

    pub fn from_rat(m: &RatMatrix, nvars: usize) -> Self {
        MatPoly {
            rows: m.rows,
            cols: m.cols,
            nvars,
            entries: m.data.iter().map(|c| Poly::constant(nvars, c.clone())).collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn get(&self, i: usize, j: usize) -> &Poly {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, p: Poly) {
        assert_eq!(p.nvars(), self.nvars);
        self.entries[i * self.cols + j] = p;
    }

    pub fn entries(&self) -> &[Poly] {
        &self.entries
    }

    pub fn entries_mut(&mut self) -> &mut [Poly] {
        &mut self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Poly::is_zero)
    }

    pub fn degree(&self) -> Option<u32> {
        self.entries.iter().filter_map(Poly::degree).max()
    }

    fn same_shape(&self, other: &MatPoly, op: &'static str) -> Result<()> {
        if self.nvars != other.nvars {
            return Err(Error::VarMismatch { left: self.nvars, right: other.nvars });
        }
        if self.shape() != other.shape() {
            return Err(Error::ShapeMismatch { op, left: self.shape(), right: other.shape() });
        }
        Ok(())
    }

    /// `self += w A^T A` in place; `A` must have `self.rows()` columns.
    pub(crate) fn add_weighted_gram(&mut self, a: &MatPoly, w: &Rational) {
        let n = self.cols;
        debug_assert_eq!(a.cols, n);
        let ints: Vec<IntPoly> = a.entries.iter().map(IntPoly::new).collect();
        for i in 0..n {
            for j in i..n {
                for k in 0..a.rows {
                    let entry = &mut self.entries[i * n + j];
                    entry.add_int_product(&ints[k * n + i], &ints[k * n + j], Some(w));
                }
            }
        }
        for i in 0..n {
            for j in 0..i {
                self.entries[i * n + j] = self.entries[j * n + i].clone();
            }
        }
    }

    /// `self += other` in place.
    pub(crate) fn add_assign_mat(&mut self, other: &MatPoly) {
        debug_assert_eq!(self.shape(), other.shape());
        for (a, b) in self.entries.iter_mut().zip(&other.entries) {
            a.add_assign_poly(b);
        }
    }

    pub fn add(&self, other: &MatPoly) -> Result<MatPoly> {
        self.same_shape(other, "add")?;
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| a + b).collect();
        Ok(self.with_entries(entries))
    }

    pub fn sub(&self, other: &MatPoly) -> Result<MatPoly> {
        self.same_shape(other, "sub")?;
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| a - b).collect();
        Ok(self.with_entries(entries))
    }

    pub fn mul(&self, other: &MatPoly) -> Result<MatPoly> {
        if self.nvars != other.nvars {
            return Err(Error::VarMismatch { left: self.nvars, right: other.nvars });
        }
        if self.cols != other.rows {
            return Err(Error::ShapeMismatch { op: "mul", left: self.shape(), right: other.shape() });
        }
        let mut out = MatPoly::zeros(self.rows, other.cols, self.nvars);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = Poly::zero(self.nvars);
                for k in 0..self.cols {
                    acc.add_product(self.get(i, k), other.get(k, j), None);
                }
                out.entries[i * other.cols + j] = acc;
            }
        }
        Ok(out)
    }

    pub fn transpose(&self) -> MatPoly {
        let mut out = MatPoly::zeros(self.cols, self.rows, self.nvars);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.entries[j * self.rows + i] = self.get(i, j).clone();
            }
        }
        out
    }

    /// `A^T A`, exploiting symmetry of the result.
    pub fn gram(&self) -> MatPoly {
        let n = self.cols;
        let mut out = MatPoly::zeros(n, n, self.nvars);
        for i in 0..n {
            for j in i..n {
                let mut acc = Poly::zero(self.nvars);
                for k in 0..self.rows {
                    acc.add_product(self.get(k, i), self.get(k, j), None);
                }
                if i != j {
                    out.entries[j * n + i] = acc.clone();
                }
                out.entries[i * n + j] = acc;
            }
        }
        out
    }

    pub fn scale_by_poly(&self, p: &Poly) -> Result<MatPoly> {
        if p.nvars() != self.nvars {
            return Err(Error::VarMismatch { left: self.nvars, right: p.nvars() });
        }
        let entries = self.entries.iter().map(|e| e * p).collect();
        Ok(self.with_entries(entries))
    }

    pub fn scale(&self, c: &Rational) -> MatPoly {
        let entries = self.entries.iter().map(|e| e.scale(c)).collect();
        self.with_entries(entries)
    }

    pub fn neg(&self) -> MatPoly {
        self.scale(&-Rational::one())
    }

    fn with_entries(&self, entries: Vec<Poly>) -> MatPoly {
        MatPoly { rows: self.rows, cols: self.cols, nvars: self.nvars, entries }
    }

    pub fn eval(&self, point: &RatPoint) -> Result<RatMatrix> {
        if point.dim() != self.nvars {
            return Err(Error::DimMismatch { expected: self.nvars, found: point.dim() });
        }
        let data = self
            .entries
            .iter()
            .map(|p| p.eval(point.coords()))
            .collect::<Result<Vec<_>>>()?;
        Ok(RatMatrix { rows: self.rows, cols: self.cols, data })
    }

    pub fn eval_f64(&self, point: &[f64]) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j).eval_f64(point))
    }

    pub fn is_symmetric(&self) -> Result<bool> {
        if self.rows != self.cols {
            return Err(Error::NotSquare(self.rows, self.cols));
        }
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                if self.get(i, j) != self.get(j, i) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// Returns the constant matrix if every entry is constant.
    pub fn as_constant(&self) -> Option<RatMatrix> {
        let data = self.entries.iter().map(Poly::as_constant).collect::<Option<Vec<_>>>()?;
        Some(RatMatrix { rows: self.rows, cols: self.cols, data })
    }

    /// Rows `r0..r1`, columns `c0..c1`.
    pub fn submatrix(&self, r0: usize, r1: usize, c0: usize, c1: usize) -> MatPoly {
        let mut out = MatPoly::zeros(r1 - r0, c1 - c0, self.nvars);
        for i in r0..r1 {
            for j in c0..c1 {
                out.entries[(i - r0) * (c1 - c0) + (j - c0)] = self.get(i, j).clone();
            }
        }
        out
    }

    /// Assembles `[[a, b], [c, d]]` from four blocks.
    pub fn block2x2(a: &MatPoly, b: &MatPoly, c: &MatPoly, d: &MatPoly) -> Result<MatPoly> {
        if a.rows != b.rows || c.rows != d.rows || a.cols != c.cols || b.cols != d.cols {
            return Err(Error::ShapeMismatch { op: "block2x2", left: a.shape(), right: d.shape() });
        }
        let rows = a.rows + c.rows;
        let cols = a.cols + b.cols;
        let mut out = MatPoly::zeros(rows, cols, a.nvars);
        for (blk, r0, c0) in [(a, 0, 0), (b, 0, a.cols), (c, a.rows, 0), (d, a.rows, a.cols)] {
            for i in 0..blk.rows {
                for j in 0..blk.cols {
                    out.entries[(r0 + i) * cols + c0 + j] = blk.get(i, j).clone();
                }
            }
        }
        Ok(out)
    }

    /// Permutation matrix `P` with `P[i][perm[i]] = 1`, so `(P A P^T)[i][j] = A[perm[i]][perm[j]]`.
    pub fn permutation(perm: &[usize], nvars: usize) -> MatPoly {
        let n = perm.len();
        let mut out = MatPoly::zeros(n, n, nvars);
        for (i, &p) in perm.iter().enumerate() {
            out.entries[i * n + p] = Poly::one(nvars);
        }
        out
    }

    pub fn display_with<'a>(&'a self, names: &'a [String]) -> MatDisplay<'a> {
        MatDisplay { m: self, names }
    }
}

pub struct MatDisplay<'a> {
    m: &'a MatPoly,
    names: &'a [String],
}

impl fmt::Display for MatDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for i in 0..self.m.rows {
            if i > 0 {
                f.write_str(", ")?;
            }
            f.write_str("[")?;
            for j in 0..self.m.cols {
                if j > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{}", self.m.get(i, j).display_with(self.names))?;
            }
            f.write_str("]")?;
        }
        f.write_str("]")
    }
}

impl fmt::Display for MatPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = default_names(self.nvars);
        write!(f, "{}", self.display_with(&names))
    }
}

/// Dense rational matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Rational>,
}

impl RatMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RatMatrix { rows, cols, data: vec![Rational::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = Rational::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        RatMatrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Rational) {
        self.data[i * self.cols + j] = v;
    }

    pub fn transpose(&self) -> RatMatrix {
        let mut out = RatMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.get(i, j).clone();
            }
        }
        out
    }

    pub fn mul(&self, other: &RatMatrix) -> RatMatrix {
        assert_eq!(self.cols, other.rows, "shape mismatch");
        let mut out = RatMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        out.data[i * other.cols + j] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn is_symmetric(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    pub fn to_f64(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_fn(self.rows, self.cols, |i, j| to_f64(self.get(i, j)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{rat_int, rat};

    fn x() -> Poly {
        Poly::var(1, 0)
    }

    fn c(v: i64) -> Poly {
        Poly::from_int(1, v)
    }

    #[test]
    fn rank_one_gram() {
        let a = MatPoly::from_rows(vec![vec![x(), c(1)]]).unwrap();
        let g = a.transpose().mul(&a).unwrap();
        let expected = MatPoly::from_rows(vec![vec![x().pow(2), x()], vec![x(), c(1)]]).unwrap();
        assert_eq!(g, expected);
        assert_eq!(a.gram(), expected);
    }

    #[test]
    fn identity_is_neutral() {
        let f = MatPoly::from_rows(vec![vec![c(2), x()], vec![x(), c(1) + x().pow(2)]]).unwrap();
        assert_eq!(MatPoly::identity(2, 1).mul(&f).unwrap(), f);
        assert_eq!(f.mul(&MatPoly::identity(2, 1)).unwrap(), f);
    }

    #[test]
    fn transpose_of_product() {
        let a = MatPoly::from_rows(vec![vec![x(), c(2), c(0)], vec![c(1), x().pow(2), x()]]).unwrap();
        let b = MatPoly::from_rows(vec![vec![c(3)], vec![x()], vec![c(1) - x()]]).unwrap();
        let lhs = a.mul(&b).unwrap().transpose();
        let rhs = b.transpose().mul(&a.transpose()).unwrap();
        assert_eq!(lhs, rhs);
        assert!(matches!(a.mul(&a), Err(Error::ShapeMismatch { .. })));
    }

    #[test]
    fn schur_congruence_at_sample_point() {
        // [[1, -g/f],[0, I]]^T F [[1, -g/f],[0, I]] = diag(f, H - g^T g / f)
        let f11 = c(2) + x();
        let g = x().pow(2) - c(1);
        let h = c(5) + x().pow(2);
        let f = MatPoly::from_rows(vec![vec![f11.clone(), g.clone()], vec![g.clone(), h.clone()]]).unwrap();
        let pt = RatPoint::new(vec![rat(1, 3)]);
        let fv = f.eval(&pt).unwrap();
        let f11v = f11.eval(pt.coords()).unwrap();
        let gv = g.eval(pt.coords()).unwrap();
        let hv = h.eval(pt.coords()).unwrap();
        let t = RatMatrix::from_rows(vec![
            vec![rat_int(1), -(&gv / &f11v)],
            vec![rat_int(0), rat_int(1)],
        ]);
        let d = t.transpose().mul(&fv).mul(&t);
        assert_eq!(d.get(0, 0), &f11v);
        assert!(d.get(0, 1).is_zero() && d.get(1, 0).is_zero());
        assert_eq!(d.get(1, 1), &(&hv - &gv * &gv / &f11v));
    }

    #[test]
    fn evaluation_and_symmetry() {
        let f = MatPoly::from_rows(vec![vec![c(2), x()], vec![x(), c(1) + x().pow(2)]]).unwrap();
        let at0 = f.eval(&RatPoint::new(vec![rat_int(0)])).unwrap();
        assert_eq!(at0, RatMatrix::from_rows(vec![vec![rat_int(2), rat_int(0)], vec![rat_int(0), rat_int(1)]]));
        let at1 = f.eval(&RatPoint::new(vec![rat_int(1)])).unwrap();
        assert_eq!(at1, RatMatrix::from_rows(vec![vec![rat_int(2), rat_int(1)], vec![rat_int(1), rat_int(2)]]));
        let id = MatPoly::identity(3, 1).eval(&RatPoint::new(vec![rat(7, 2)])).unwrap();
        assert_eq!(id, RatMatrix::identity(3));
        assert!(f.is_symmetric().unwrap());
        assert!(f.transpose().is_symmetric().unwrap());
        let skew = MatPoly::from_rows(vec![vec![c(0), x()], vec![-x(), c(0)]]).unwrap();
        assert!(!skew.is_symmetric().unwrap());
        let rect = MatPoly::from_rows(vec![vec![c(0), x()]]).unwrap();
        assert!(matches!(rect.is_symmetric(), Err(Error::NotSquare(1, 2))));
    }

    #[test]
    fn permutation_congruence() {
        let f = MatPoly::from_rows(vec![
            vec![c(1), x(), c(3)],
            vec![x(), c(4), c(5)],
            vec![c(3), c(5), c(6)],
        ])
        .unwrap();
        let perm = [2, 0, 1];
        let p = MatPoly::permutation(&perm, 1);
        let pf = p.mul(&f).unwrap().mul(&p.transpose()).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(pf.get(i, j), f.get(perm[i], perm[j]));
            }
        }
    }
}
