//! Exact symmetric-pivoted LDL^T over the rationals.

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::matpoly::{MatPoly, RatMatrix};
use crate::poly::{Monomial, Poly, Rational};
use crate::witness::SosWitness;

/// `P M P^T = L D L^T` with `(P M P^T)[i][j] = M[perm[i]][perm[j]]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LdltResult {
    pub perm: Vec<usize>,
    /// Unit lower triangular.
    pub l: RatMatrix,
    pub d: Vec<Rational>,
    pub is_psd: bool,
    /// False when the elimination stopped at an all-zero diagonal with a
    /// nonzero off-diagonal remainder (only possible for indefinite input).
    pub complete: bool,
}

impl LdltResult {
    /// Smallest pivot produced (zero for an empty matrix).
    pub fn min_pivot(&self) -> Rational {
        self.d.iter().min().cloned().unwrap_or_else(Rational::zero)
    }

    pub fn rank(&self) -> usize {
        self.d.iter().filter(|v| !v.is_zero()).count()
    }
}

/// Pivots on the largest remaining diagonal entry (lowest index on ties).
/// When every remaining diagonal entry is zero the remainder must vanish for
/// the matrix to be PSD.
pub fn psd_ldlt(m: &RatMatrix) -> LdltResult {
    assert_eq!(m.rows, m.cols, "psd_ldlt needs a square matrix");
    let n = m.rows;
    let mut a = m.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut l = RatMatrix::identity(n);
    let mut d = Vec::with_capacity(n);
    let mut is_psd = true;
    let mut complete = true;

    for k in 0..n {
        let mut best = k;
        for i in (k + 1)..n {
            if a.get(i, i) > a.get(best, best) {
                best = i;
            }
        }
        if !a.get(best, best).is_positive() {
            if (k..n).any(|i| a.get(i, i).is_negative()) {
                is_psd = false;
                // keep factoring through the most negative pivot
                best = (k..n).min_by(|&i, &j| a.get(i, i).cmp(a.get(j, j)).then(i.cmp(&j))).unwrap();
            } else {
                let rest_zero = (k..n).all(|i| (k..n).all(|j| a.get(i, j).is_zero()));
                if !rest_zero {
                    is_psd = false;
                    complete = false;
                }
                d.extend(std::iter::repeat_with(Rational::zero).take(n - k));
                break;
            }
        }
        if best != k {
            swap_sym(&mut a, k, best);
            perm.swap(k, best);
            for j in 0..k {
                let t = l.get(k, j).clone();
                l.set(k, j, l.get(best, j).clone());
                l.set(best, j, t);
            }
        }
        let pivot = a.get(k, k).clone();
        for i in (k + 1)..n {
            let lik = a.get(i, k) / &pivot;
            if lik.is_zero() {
                continue;
            }
            for j in (k + 1)..=i {
                let v = a.get(i, j) - &lik * a.get(j, k);
                a.set(i, j, v.clone());
                a.set(j, i, v);
            }
            l.set(i, k, lik);
        }
        d.push(pivot);
    }
    if d.iter().any(Signed::is_negative) {
        is_psd = false;
    }
    LdltResult { perm, l, d, is_psd, complete }
}

fn swap_sym(a: &mut RatMatrix, i: usize, j: usize) {
    let n = a.rows;
    for c in 0..n {
        a.data.swap(i * n + c, j * n + c);
    }
    for r in 0..n {
        a.data.swap(r * n + i, r * n + j);
    }
}

/// Turns a PSD Gram matrix over `basis (x) I_n` into weighted squares.
///
/// Index `a * n + r` of `g` pairs basis monomial `a` with matrix row `r`, so
/// the represented matrix is `M^T G M` with `M = [m_1 I_n; ...; m_k I_n]`.
/// Each nonzero pivot `d_j` contributes `d_j * A_j^T A_j` where the `1 x n`
/// row `A_j` is column `j` of `L` applied to the permuted basis.
pub fn gram_to_sos(g: &RatMatrix, basis: &[Monomial], n: usize, nvars: usize) -> Result<SosWitness> {
    if g.rows != basis.len() * n || g.cols != g.rows {
        return Err(Error::ShapeMismatch { op: "gram_to_sos", left: (g.rows, g.cols), right: (basis.len() * n, basis.len() * n) });
    }
    let f = psd_ldlt(g);
    if !f.is_psd {
        return Err(Error::NotPsd);
    }
    let dim = g.rows;
    let mut out = SosWitness::empty(n, nvars);
    for (j, dj) in f.d.iter().enumerate() {
        if dj.is_zero() {
            continue;
        }
        let mut row = MatPoly::zeros(1, n, nvars);
        for i in j..dim {
            let lij = f.l.get(i, j);
            if lij.is_zero() {
                continue;
            }
            let idx = f.perm[i];
            let (a, r) = (idx / n, idx % n);
            let entry = row.get(0, r) + &Poly::monomial(basis[a].clone(), lij.clone());
            row.set(0, r, entry);
        }
        out.push(dj.clone(), row)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{rat, rat_int};

    fn m(rows: Vec<Vec<i64>>) -> RatMatrix {
        RatMatrix::from_rows(rows.into_iter().map(|r| r.into_iter().map(rat_int).collect()).collect())
    }

    fn reconstruct(f: &LdltResult) -> RatMatrix {
        let n = f.d.len();
        let mut dm = RatMatrix::zeros(n, n);
        for i in 0..n {
            dm.set(i, i, f.d[i].clone());
        }
        f.l.mul(&dm).mul(&f.l.transpose())
    }

    fn permuted(mat: &RatMatrix, perm: &[usize]) -> RatMatrix {
        let n = perm.len();
        let mut out = RatMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                out.set(i, j, mat.get(perm[i], perm[j]).clone());
            }
        }
        out
    }

    #[test]
    fn hand_factorizations() {
        let f = psd_ldlt(&m(vec![vec![2, -1], vec![-1, 1]]));
        assert!(f.is_psd);
        assert_eq!(f.d, vec![rat_int(2), rat(1, 2)]);

        let f = psd_ldlt(&m(vec![vec![1, 2], vec![2, 1]]));
        assert!(!f.is_psd);
        assert_eq!(f.d, vec![rat_int(1), rat_int(-3)]);

        let f = psd_ldlt(&RatMatrix::zeros(3, 3));
        assert!(f.is_psd && f.complete);
        assert_eq!(f.rank(), 0);

        // 4I - C^T C for C = [[1,1],[0,1]]
        let f = psd_ldlt(&m(vec![vec![3, -1], vec![-1, 2]]));
        assert_eq!(f.d, vec![rat_int(3), rat(5, 3)]);
    }

    #[test]
    fn zero_diagonal_with_coupling_is_not_psd() {
        let f = psd_ldlt(&m(vec![vec![0, 1], vec![1, 0]]));
        assert!(!f.is_psd);
        assert!(!f.complete);
        let f = psd_ldlt(&m(vec![vec![1, 1, 0], vec![1, 1, 0], vec![0, 0, 0]]));
        assert!(f.is_psd);
        assert_eq!(f.rank(), 1);
        assert_eq!(permuted(&m(vec![vec![1, 1, 0], vec![1, 1, 0], vec![0, 0, 0]]), &f.perm), reconstruct(&f));
    }

    #[test]
    fn gram_bridge() {
        let basis = Monomial::all_up_to(1, 1); // {1, x}
        let w = gram_to_sos(&RatMatrix::identity(2), &basis, 1, 1).unwrap();
        assert_eq!(w.len(), 2);
        let x = Poly::var(1, 0);
        assert_eq!(w.expand(), MatPoly::from_poly(Poly::one(1) + x.pow(2)));

        let w = gram_to_sos(&m(vec![vec![2, -1], vec![-1, 1]]), &basis, 1, 1).unwrap();
        assert_eq!(w.terms()[0].weight, rat_int(2));
        assert_eq!(w.terms()[0].factor, MatPoly::from_poly(Poly::one(1) - x.scale(&rat(1, 2))));
        assert_eq!(w.terms()[1].weight, rat(1, 2));
        assert_eq!(w.expand(), MatPoly::from_poly(x.pow(2) - x.scale(&rat_int(2)) + Poly::from_int(1, 2)));

        // G = v v^T with v = (1, 2): a single square (1 + 2x)^2
        let w = gram_to_sos(&m(vec![vec![1, 2], vec![2, 4]]), &basis, 1, 1).unwrap();
        assert_eq!(w.len(), 1);
        assert_eq!(w.expand(), MatPoly::from_poly((Poly::one(1) + x.scale(&rat_int(2))).pow(2)));

        assert_eq!(gram_to_sos(&m(vec![vec![1, 2], vec![2, 1]]), &basis, 1, 1), Err(Error::NotPsd));
    }

    #[test]
    fn matrix_gram_bridge() {
        // basis {1} (x) I_2 with G = [[2,1],[1,2]]: constant matrix
        let basis = vec![Monomial::one(1)];
        let g = m(vec![vec![2, 1], vec![1, 2]]);
        let w = gram_to_sos(&g, &basis, 2, 1).unwrap();
        assert_eq!(w.expand(), MatPoly::from_rat(&g, 1));
    }
}
