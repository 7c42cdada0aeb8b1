//! Floating-point feasibility search for the Gram blocks of a [`GramSystem`].
//!
//! Two methods are available. Alternating projections between the product of
//! PSD cones and the affine set is simple but stalls when every solution lies
//! on the boundary of the cone. The default primal-dual interior-point method
//! maximizes the smallest eigenvalue `lambda` over all blocks (capped at one);
//! its iterates approach the relative interior of the solution set, so blocks
//! forced onto the boundary show up as near-zero diagonal entries.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};

use crate::poly::to_f64;

use super::system::{upper_index, GramSystem};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Method {
    #[default]
    InteriorPoint,
    AlternatingProjections,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    /// Converged when the relative residuals drop below `tol`.
    pub tol: f64,
    pub max_iters: usize,
    /// Eigenvalue floor used by the cone projection (alternating projections only).
    pub margin: f64,
    pub method: Method,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { tol: 1e-9, max_iters: 20_000, margin: 1e-6, method: Method::default() }
    }
}

/// Per-block symmetric float matrices.
#[derive(Clone, Debug)]
pub struct FloatSolution {
    pub blocks: Vec<DMatrix<f64>>,
    /// `||A x - b||_2` recomputed on the returned blocks.
    pub residual: f64,
    pub min_eigenvalues: Vec<f64>,
    pub iterations: usize,
}

impl FloatSolution {
    /// Smallest eigenvalue over all nonempty blocks.
    pub fn margin(&self) -> f64 {
        self.min_eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Largest diagonal entry, at least one.
    pub fn scale(&self) -> f64 {
        self.blocks.iter().flat_map(|b| b.diagonal().iter().copied().collect::<Vec<_>>()).fold(1.0, f64::max)
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum SolveError {
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NotConverged { residual: f64, iterations: usize },
    #[error("numeric breakdown: {0}")]
    Breakdown(String),
}

/// Float copy of the constraint rows and the block layout. One caller per
/// instance; [`solve`](Self::solve) keeps its iteration state on the stack.
pub struct FeasibilitySolver {
    rows: Vec<Vec<(usize, f64)>>,
    b: Vec<f64>,
    layout: Vec<(usize, usize)>,
    num_vars: usize,
}

impl FeasibilitySolver {
    pub fn new(sys: &GramSystem) -> Result<Self, SolveError> {
        let rows: Vec<Vec<(usize, f64)>> =
            sys.sparse_rows().iter().map(|r| r.iter().map(|(v, c)| (*v, to_f64(c))).collect()).collect();
        if rows.iter().flatten().any(|(_, c)| !c.is_finite()) {
            return Err(SolveError::Breakdown("non-finite coefficient".into()));
        }
        let b = sys.rhs().iter().map(to_f64).collect();
        let layout = sys.blocks().iter().enumerate().map(|(i, blk)| (sys.offset(i), blk.dim())).collect();
        Ok(FeasibilitySolver { rows, b, layout, num_vars: sys.num_vars() })
    }

    pub fn solve(&self, cfg: &SolverConfig) -> Result<FloatSolution, SolveError> {
        let (blocks, iterations) = match cfg.method {
            Method::InteriorPoint => self.interior_point(cfg)?,
            Method::AlternatingProjections => self.alternating(cfg)?,
        };
        let x = self.pack_all(&blocks);
        let residual = self.residual(&x);
        if !residual.is_finite() {
            return Err(SolveError::Breakdown("non-finite final residual".into()));
        }
        let min_eigenvalues = blocks
            .iter()
            .map(|m| if m.nrows() == 0 { f64::INFINITY } else { SymmetricEigen::new(m.clone()).eigenvalues.min() })
            .collect();
        Ok(FloatSolution { blocks, residual, min_eigenvalues, iterations })
    }

    fn residual(&self, x: &[f64]) -> f64 {
        self.rows
            .iter()
            .zip(&self.b)
            .map(|(row, bi)| {
                let r: f64 = row.iter().map(|(v, c)| c * x[*v]).sum::<f64>() - bi;
                r * r
            })
            .sum::<f64>()
            .sqrt()
    }

    fn pack_all(&self, blocks: &[DMatrix<f64>]) -> Vec<f64> {
        let mut x = vec![0.0; self.num_vars];
        for (m, &(off, k)) in blocks.iter().zip(&self.layout) {
            for i in 0..k {
                for j in i..k {
                    x[off + upper_index(k, i, j)] = m[(i, j)];
                }
            }
        }
        x
    }

    /// Alternating projections in svec scaling (off-diagonals times sqrt 2)
    /// from the affine projection of the origin. After convergence the
    /// iterate is shifted by `10 tol I` and projected back onto the affine set.
    fn alternating(&self, cfg: &SolverConfig) -> Result<(Vec<DMatrix<f64>>, usize), SolveError> {
        let nv = self.num_vars;
        let scale = svec_scale(&self.layout, nv);
        let mut a = DMatrix::<f64>::zeros(self.rows.len(), nv);
        for (i, row) in self.rows.iter().enumerate() {
            for (v, c) in row {
                a[(i, *v)] = c / scale[*v];
            }
        }
        let pinv = a.clone().pseudo_inverse(1e-10).map_err(|e| SolveError::Breakdown(format!("pseudo-inverse failed: {}", e)))?;
        let b = DVector::from_column_slice(&self.b);
        let affine = |y: &DVector<f64>| -> DVector<f64> { y - &pinv * (&a * y - &b) };
        let cone = |y: &DVector<f64>, floor: f64| -> DVector<f64> {
            let mut out = y.clone();
            for &(off, k) in &self.layout {
                if k == 0 {
                    continue;
                }
                let eig = SymmetricEigen::new(svec_unpack(y, off, k));
                let clipped = eig.eigenvalues.map(|l| l.max(floor));
                let rec = &eig.eigenvectors * DMatrix::from_diagonal(&clipped) * eig.eigenvectors.transpose();
                svec_pack(&rec, &mut out, off, k);
            }
            out
        };
        let mut y = affine(&DVector::zeros(nv));
        let mut history = f64::INFINITY;
        let mut converged = None;
        for it in 0..cfg.max_iters {
            let z = cone(&y, cfg.margin);
            let res = (&a * &z - &b).norm();
            if !res.is_finite() {
                return Err(SolveError::Breakdown(format!("residual is {} at iteration {}", res, it)));
            }
            if res < cfg.tol {
                converged = Some((z, it));
                break;
            }
            // stagnation check every 500 iterations
            if it % 500 == 499 {
                if res > 0.995 * history {
                    return Err(SolveError::NotConverged { residual: res, iterations: it + 1 });
                }
                history = res;
            }
            y = affine(&z);
        }
        let Some((z, iterations)) = converged else {
            let residual = (&a * &cone(&y, cfg.margin) - &b).norm();
            return Err(SolveError::NotConverged { residual, iterations: cfg.max_iters });
        };
        let mut shifted = z;
        for &(off, k) in &self.layout {
            for i in 0..k {
                shifted[off + upper_index(k, i, i)] += 10.0 * cfg.tol;
            }
        }
        let fin = affine(&shifted);
        Ok((self.layout.iter().map(|&(off, k)| svec_unpack(&fin, off, k)).collect(), iterations))
    }

    /// Primal-dual path following (HKM direction, Mehrotra predictor-corrector)
    /// on `max lambda  s.t.  A(Y + lambda I) = b,  lambda + s = 1,  Y, lambda, s >= 0`.
    /// Returns the blocks `Y + lambda I`.
    fn interior_point(&self, cfg: &SolverConfig) -> Result<(Vec<DMatrix<f64>>, usize), SolveError> {
        let sdp = Sdp::from_solver(self);
        let (x, iterations) = sdp.solve(cfg.tol, cfg.max_iters.min(200))?;
        let lam = x[sdp.lambda][(0, 0)];
        let blocks = self
            .layout
            .iter()
            .enumerate()
            .map(|(i, &(_, k))| &x[i] + DMatrix::<f64>::identity(k, k) * lam)
            .collect();
        Ok((blocks, iterations))
    }
}

/// Entry `(block, p, q, value)` of a symmetric constraint matrix.
type Entry = (usize, usize, usize, f64);

/// Block-diagonal SDP in standard form `min <C, X>  s.t.  <A_i, X> = b_i, X >= 0`.
struct Sdp {
    dims: Vec<usize>,
    rows: Vec<Vec<Entry>>,
    b: Vec<f64>,
    /// For each block, the constraints touching it with their entries there.
    by_block: Vec<Vec<(usize, Vec<(usize, usize, f64)>)>>,
    lambda: usize,
}

impl Sdp {
    fn from_solver(s: &FeasibilitySolver) -> Self {
        let nb = s.layout.len();
        let lambda = nb;
        let slack = nb + 1;
        let mut dims: Vec<usize> = s.layout.iter().map(|&(_, k)| k).collect();
        dims.extend([1, 1]);
        let mut owner = vec![(0, 0, 0); s.num_vars];
        for (bi, &(off, k)) in s.layout.iter().enumerate() {
            for i in 0..k {
                for j in i..k {
                    owner[off + upper_index(k, i, j)] = (bi, i, j);
                }
            }
        }
        let mut rows = Vec::new();
        let mut b = Vec::new();
        for (row, &bi) in s.rows.iter().zip(&s.b) {
            if row.is_empty() {
                continue;
            }
            let norm = row.iter().map(|(_, c)| c.abs()).fold(0.0, f64::max);
            let mut entries = Vec::with_capacity(2 * row.len() + 1);
            let mut lam = 0.0;
            for &(v, c) in row {
                let (blk, p, q) = owner[v];
                let c = c / norm;
                if p == q {
                    entries.push((blk, p, p, c));
                    lam += c;
                } else {
                    entries.push((blk, p, q, 0.5 * c));
                    entries.push((blk, q, p, 0.5 * c));
                }
            }
            if lam != 0.0 {
                entries.push((lambda, 0, 0, lam));
            }
            rows.push(entries);
            b.push(bi / norm);
        }
        rows.push(vec![(lambda, 0, 0, 1.0), (slack, 0, 0, 1.0)]);
        b.push(1.0);
        let mut by_block: Vec<Vec<(usize, Vec<(usize, usize, f64)>)>> = vec![Vec::new(); dims.len()];
        for (i, row) in rows.iter().enumerate() {
            let mut per: std::collections::BTreeMap<usize, Vec<(usize, usize, f64)>> = Default::default();
            for &(blk, p, q, v) in row {
                per.entry(blk).or_default().push((p, q, v));
            }
            for (blk, es) in per {
                by_block[blk].push((i, es));
            }
        }
        Sdp { dims, rows, b, by_block, lambda }
    }

    fn apply(&self, x: &[DMatrix<f64>]) -> DVector<f64> {
        DVector::from_iterator(self.rows.len(), self.rows.iter().map(|row| row.iter().map(|&(k, p, q, v)| v * x[k][(p, q)]).sum()))
    }

    fn adjoint(&self, y: &DVector<f64>) -> Vec<DMatrix<f64>> {
        let mut out: Vec<DMatrix<f64>> = self.dims.iter().map(|&k| DMatrix::zeros(k, k)).collect();
        for (row, yi) in self.rows.iter().zip(y.iter()) {
            for &(k, p, q, v) in row {
                out[k][(p, q)] += v * yi;
            }
        }
        out
    }

    fn cost(&self) -> Vec<DMatrix<f64>> {
        let mut c: Vec<DMatrix<f64>> = self.dims.iter().map(|&k| DMatrix::zeros(k, k)).collect();
        c[self.lambda][(0, 0)] = -1.0;
        c
    }

    /// `M_ij = tr(A_i X A_j Z^-1)`.
    fn schur(&self, x: &[DMatrix<f64>], zinv: &[DMatrix<f64>]) -> DMatrix<f64> {
        let m = self.rows.len();
        let mut out = DMatrix::<f64>::zeros(m, m);
        for (blk, cons) in self.by_block.iter().enumerate() {
            let k = self.dims[blk];
            if k == 0 {
                continue;
            }
            let (xb, zb) = (&x[blk], &zinv[blk]);
            let mut h = DMatrix::<f64>::zeros(k, k);
            for (i, ei) in cons {
                h.fill(0.0);
                // h[s][r] = sum v zinv[s][p] x[q][r]
                for &(p, q, v) in ei {
                    for s in 0..k {
                        let zs = v * zb[(s, p)];
                        if zs != 0.0 {
                            for r in 0..k {
                                h[(s, r)] += zs * xb[(q, r)];
                            }
                        }
                    }
                }
                for (j, ej) in cons {
                    let mut acc = 0.0;
                    for &(r, s, w) in ej {
                        acc += w * h[(s, r)];
                    }
                    out[(*i, *j)] += acc;
                }
            }
        }
        out
    }

    fn solve(&self, tol: f64, max_iters: usize) -> Result<(Vec<DMatrix<f64>>, usize), SolveError> {
        let n: usize = self.dims.iter().sum();
        let b = DVector::from_column_slice(&self.b);
        let c = self.cost();
        let mut x: Vec<DMatrix<f64>> = self.dims.iter().map(|&k| DMatrix::identity(k, k)).collect();
        let mut z = x.clone();
        let mut y = DVector::<f64>::zeros(self.rows.len());
        let bnorm = 1.0 + b.norm();
        for it in 0..max_iters {
            let rp = &b - self.apply(&x);
            let aty = self.adjoint(&y);
            let rd: Vec<DMatrix<f64>> = (0..self.dims.len()).map(|k| &c[k] - &aty[k] - &z[k]).collect();
            let mu = inner(&x, &z) / n as f64;
            let pres = rp.norm() / bnorm;
            let dres = rd.iter().map(|m| m.norm_squared()).sum::<f64>().sqrt() / 2.0;
            if !(pres.is_finite() && dres.is_finite() && mu.is_finite()) {
                return Err(SolveError::Breakdown(format!("non-finite iterate at step {}", it)));
            }
            if pres < tol && dres < tol && mu < tol {
                return Ok((x, it));
            }
            if y.amax() > 1e12 {
                return Err(SolveError::NotConverged { residual: rp.norm(), iterations: it });
            }
            let zinv: Vec<DMatrix<f64>> = z.iter().map(|m| inverse_spd(m)).collect::<Option<_>>().ok_or_else(|| {
                SolveError::Breakdown("dual iterate lost definiteness".into())
            })?;
            let mut mmat = self.schur(&x, &zinv);
            mmat = (&mmat + mmat.transpose()) * 0.5;
            let chol = factor_with_jitter(mmat).ok_or_else(|| SolveError::Breakdown("Schur complement is singular".into()))?;

            let xz: Vec<DMatrix<f64>> = x.iter().zip(&z).map(|(a, b)| a * b).collect();
            let direction = |k_mat: &[DMatrix<f64>]| -> (Vec<DMatrix<f64>>, DVector<f64>, Vec<DMatrix<f64>>) {
                // dX = (K - X Rd) Zinv + X A^T(dy) Zinv
                let base: Vec<DMatrix<f64>> =
                    (0..self.dims.len()).map(|k| (&k_mat[k] - &x[k] * &rd[k]) * &zinv[k]).collect();
                let rhs = &rp - self.apply(&base);
                let dy = chol.solve(&rhs);
                let atdy = self.adjoint(&dy);
                let dz: Vec<DMatrix<f64>> = (0..self.dims.len()).map(|k| &rd[k] - &atdy[k]).collect();
                let dx: Vec<DMatrix<f64>> = (0..self.dims.len())
                    .map(|k| {
                        let m = (&k_mat[k] - &x[k] * &dz[k]) * &zinv[k];
                        (&m + m.transpose()) * 0.5
                    })
                    .collect();
                (dx, dy, dz)
            };

            let k_aff: Vec<DMatrix<f64>> = xz.iter().map(|m| -m).collect();
            let (dx_a, _, dz_a) = direction(&k_aff);
            let ap = step_length(&x, &dx_a);
            let ad = step_length(&z, &dz_a);
            let x_a: Vec<DMatrix<f64>> = x.iter().zip(&dx_a).map(|(a, d)| a + d * ap).collect();
            let z_a: Vec<DMatrix<f64>> = z.iter().zip(&dz_a).map(|(a, d)| a + d * ad).collect();
            let mu_aff = inner(&x_a, &z_a) / n as f64;
            let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

            let k_cor: Vec<DMatrix<f64>> = (0..self.dims.len())
                .map(|k| DMatrix::identity(self.dims[k], self.dims[k]) * (sigma * mu) - &xz[k] - &dx_a[k] * &dz_a[k])
                .collect();
            let (dx, dy, dz) = direction(&k_cor);
            let ap = (0.95 * step_length(&x, &dx)).min(1.0);
            let ad = (0.95 * step_length(&z, &dz)).min(1.0);
            for k in 0..self.dims.len() {
                x[k] += &dx[k] * ap;
                z[k] += &dz[k] * ad;
            }
            y += dy * ad;
        }
        let residual = (&b - self.apply(&x)).norm();
        Err(SolveError::NotConverged { residual, iterations: max_iters })
    }
}

fn inner(a: &[DMatrix<f64>], b: &[DMatrix<f64>]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.dot(y)).sum()
}

fn inverse_spd(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    if m.nrows() == 0 {
        return Some(m.clone());
    }
    Cholesky::new(m.clone()).map(|c| c.inverse())
}

fn factor_with_jitter(m: DMatrix<f64>) -> Option<Cholesky<f64, nalgebra::Dyn>> {
    let scale = m.diagonal().amax().max(1e-300);
    let mut jitter = 0.0;
    for _ in 0..8 {
        let mut t = m.clone();
        for i in 0..t.nrows() {
            t[(i, i)] += jitter;
        }
        if let Some(c) = Cholesky::new(t) {
            return Some(c);
        }
        jitter = if jitter == 0.0 { 1e-14 * scale } else { jitter * 100.0 };
    }
    None
}

/// Largest `a` with `X + a dX` positive semidefinite over all blocks (capped).
fn step_length(x: &[DMatrix<f64>], dx: &[DMatrix<f64>]) -> f64 {
    let mut best = 1e30f64;
    for (m, d) in x.iter().zip(dx) {
        if m.nrows() == 0 {
            continue;
        }
        let Some(ch) = Cholesky::new(m.clone()) else {
            return 0.0;
        };
        let l = ch.l();
        let li = match l.clone().try_inverse() {
            Some(v) => v,
            None => return 0.0,
        };
        let w = &li * d * li.transpose();
        let w = (&w + w.transpose()) * 0.5;
        let lmin = SymmetricEigen::new(w).eigenvalues.min();
        if lmin < 0.0 {
            best = best.min(-1.0 / lmin);
        }
    }
    best
}

fn svec_scale(layout: &[(usize, usize)], nv: usize) -> Vec<f64> {
    let mut s = vec![1.0; nv];
    for &(off, k) in layout {
        for i in 0..k {
            for j in (i + 1)..k {
                s[off + upper_index(k, i, j)] = std::f64::consts::SQRT_2;
            }
        }
    }
    s
}

fn svec_unpack(y: &DVector<f64>, off: usize, k: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(k, k);
    for i in 0..k {
        m[(i, i)] = y[off + upper_index(k, i, i)];
        for j in (i + 1)..k {
            let v = y[off + upper_index(k, i, j)] / std::f64::consts::SQRT_2;
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

fn svec_pack(m: &DMatrix<f64>, out: &mut DVector<f64>, off: usize, k: usize) {
    for i in 0..k {
        out[off + upper_index(k, i, i)] = m[(i, i)];
        for j in (i + 1)..k {
            out[off + upper_index(k, i, j)] = 0.5 * (m[(i, j)] + m[(j, i)]) * std::f64::consts::SQRT_2;
        }
    }
}

/// Convenience wrapper building a fresh solver for `sys`.
pub fn solve_feasibility(sys: &GramSystem, cfg: &SolverConfig) -> Result<FloatSolution, SolveError> {
    FeasibilitySolver::new(sys)?.solve(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gram::{build_gram_system, Mode};
    use crate::matpoly::MatPoly;
    use crate::poly::Poly;
    use crate::witness::ConstraintSet;

    fn one_plus_x2() -> GramSystem {
        let f = MatPoly::from_poly(Poly::one(1) + Poly::var(1, 0).pow(2));
        build_gram_system(&f, &ConstraintSet::empty(1), Mode::Preorder, 2).unwrap()
    }

    #[test]
    fn both_methods_find_identity_gram() {
        let sys = one_plus_x2();
        for method in [Method::InteriorPoint, Method::AlternatingProjections] {
            let sol = solve_feasibility(&sys, &SolverConfig { method, ..Default::default() }).unwrap();
            assert!(sol.residual < 1e-8, "{:?}", method);
            assert!(sol.margin() > 0.0);
            let g = &sol.blocks[0];
            assert!((g[(0, 0)] - 1.0).abs() < 1e-6 && (g[(1, 1)] - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn negative_constant_is_not_sos() {
        let f = MatPoly::from_poly(Poly::from_int(1, -1));
        let sys = build_gram_system(&f, &ConstraintSet::empty(1), Mode::Preorder, 2).unwrap();
        for method in [Method::InteriorPoint, Method::AlternatingProjections] {
            let r = solve_feasibility(&sys, &SolverConfig { method, max_iters: 2000, ..Default::default() });
            assert!(matches!(r, Err(SolveError::NotConverged { .. })), "{:?}: {:?}", method, r.map(|s| s.residual));
        }
    }

    #[test]
    fn boundary_solutions_show_zero_diagonals() {
        // x^2 - 2x + 1 = (x - 1)^2 has a rank-one Gram matrix only
        let f = MatPoly::from_poly((Poly::var(1, 0) - Poly::one(1)).pow(2));
        let sys = build_gram_system(&f, &ConstraintSet::empty(1), Mode::Preorder, 2).unwrap();
        let sol = solve_feasibility(&sys, &SolverConfig::default()).unwrap();
        assert!(sol.margin().abs() < 1e-6);
        assert!(sol.residual < 1e-8);
    }
}
