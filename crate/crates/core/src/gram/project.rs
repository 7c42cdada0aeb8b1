//! Exact orthogonal projection onto `{x : A x = b}` in rational arithmetic.

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::matpoly::RatMatrix;
use crate::poly::Rational;

use super::ldlt::{psd_ldlt, LdltResult};
use super::system::GramSystem;

/// Factorization of `A A^T` reused for every right-hand side of one system.
#[derive(Debug)]
pub struct ExactProjector {
    factor: LdltResult,
}

impl ExactProjector {
    pub fn new(sys: &GramSystem) -> Result<Self> {
        let rows = sys.sparse_rows();
        let r = rows.len();
        let mut aat = RatMatrix::zeros(r, r);
        for i in 0..r {
            for j in i..r {
                let v = sparse_dot(&rows[i], &rows[j]);
                if !v.is_zero() {
                    aat.set(j, i, v.clone());
                    aat.set(i, j, v);
                }
            }
        }
        let factor = psd_ldlt(&aat);
        debug_assert!(factor.is_psd);
        Ok(ExactProjector { factor })
    }

    /// Solves `(A A^T) y = rhs`; fails when `rhs` is outside the range.
    fn solve(&self, rhs: &[Rational]) -> Result<Vec<Rational>> {
        let f = &self.factor;
        let n = rhs.len();
        let mut z: Vec<Rational> = f.perm.iter().map(|&p| rhs[p].clone()).collect();
        for i in 0..n {
            for j in 0..i {
                let lij = f.l.get(i, j);
                if !lij.is_zero() && !z[j].is_zero() {
                    let t = lij * &z[j];
                    z[i] -= t;
                }
            }
        }
        for j in 0..n {
            if f.d[j].is_zero() {
                if !z[j].is_zero() {
                    return Err(Error::Inconsistent);
                }
            } else {
                z[j] = &z[j] / &f.d[j];
            }
        }
        for i in (0..n).rev() {
            for j in (i + 1)..n {
                let lji = f.l.get(j, i);
                if !lji.is_zero() && !z[j].is_zero() {
                    let t = lji * &z[j];
                    z[i] -= t;
                }
            }
        }
        let mut y = vec![Rational::zero(); n];
        for (i, &p) in f.perm.iter().enumerate() {
            y[p] = z[i].clone();
        }
        Ok(y)
    }

    /// `x - A^T (A A^T)^+ (A x - b)`; the result satisfies `A x = b` exactly.
    pub fn project(&self, sys: &GramSystem, x: &[Rational]) -> Result<Vec<Rational>> {
        let res = sys.residual(x);
        if res.iter().all(Zero::is_zero) {
            return Ok(x.to_vec());
        }
        let y = self.solve(&res)?;
        let mut out = x.to_vec();
        for (row, yi) in sys.sparse_rows().iter().zip(&y) {
            if yi.is_zero() {
                continue;
            }
            for (v, c) in row {
                out[*v] -= c * yi;
            }
        }
        if !sys.residual(&out).iter().all(Zero::is_zero) {
            return Err(Error::Inconsistent);
        }
        Ok(out)
    }
}

fn sparse_dot(a: &[(usize, Rational)], b: &[(usize, Rational)]) -> Rational {
    let (mut i, mut j) = (0, 0);
    let mut acc = Rational::zero();
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                acc += &a[i].1 * &b[j].1;
                i += 1;
                j += 1;
            }
        }
    }
    acc
}
