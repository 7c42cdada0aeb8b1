//! Matrix certificates `(1 + t) F = I_n + V` by induction on the size of `F`.
//!
//! With `F = [[f11, g], [g^T, H]]` and `K = f11 H - g^T g` one has
//! `f11^3 F = T^T diag(f11^2, K) T` for `T = [[f11, g], [0, f11 I]]`. Scalar
//! certificates for `f11` and a matrix certificate for the smaller `K` turn the
//! middle factor into `I + W`; a uniform bound on `(1 + s1) g` then absorbs the
//! triangular factor.

use std::fmt;
use std::sync::Arc;

use nalgebra::SymmetricEigen;
use num_traits::{One, Signed};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gram::{gram_to_sos, psd_ldlt};
use crate::lemma::lemma_bound;
use crate::matpoly::MatPoly;
use crate::poly::{to_f64, Monomial, Poly, RatPoint, Rational};
use crate::scalar::{certify_scalar, verify_scalar_cert, ProviderConfig, ScalarCertificate};
use crate::witness::{ConstraintSet, PreorderWitness, SosWitness};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum PivotPolicy {
    /// Diagonal entry of least total degree, ties to the lowest index.
    #[default]
    MinDegree,
    First,
}

/// `P F P^T = [[f11, g], [g^T, H]]` where `(P F P^T)[i][j] = F[perm[i]][perm[j]]`.
#[derive(Clone, Debug, PartialEq)]
pub struct SchurSplit {
    pub f11: Poly,
    pub g: MatPoly,
    pub h: MatPoly,
    pub perm: Vec<usize>,
    /// `f11 H - g^T g`.
    pub reduced: MatPoly,
}

impl SchurSplit {
    /// `P F P^T` reassembled from the blocks.
    pub fn permuted(&self) -> MatPoly {
        MatPoly::block2x2(&MatPoly::from_poly(self.f11.clone()), &self.g, &self.g.transpose(), &self.h).expect("block shapes")
    }
}

pub fn schur_split(f: &MatPoly, policy: PivotPolicy) -> Result<SchurSplit> {
    let n = f.rows();
    if n != f.cols() {
        return Err(Error::NotSquare(n, f.cols()));
    }
    if n < 2 {
        return Err(Error::DimMismatch { expected: 2, found: n });
    }
    if !f.is_symmetric()? {
        return Err(Error::NotSymmetric);
    }
    let pivot = match policy {
        PivotPolicy::First => 0,
        PivotPolicy::MinDegree => (0..n).min_by_key(|&i| f.get(i, i).degree().unwrap_or(u32::MAX)).unwrap_or(0),
    };
    let mut perm = vec![pivot];
    perm.extend((0..n).filter(|&i| i != pivot));
    let p = MatPoly::permutation(&perm, f.nvars());
    let fp = p.mul(f)?.mul(&p.transpose())?;
    let f11 = fp.get(0, 0).clone();
    let g = fp.submatrix(0, 1, 1, n);
    let h = fp.submatrix(1, n, 1, n);
    let reduced = h.scale_by_poly(&f11)?.sub(&g.gram())?;
    Ok(SchurSplit { f11, g, h, perm, reduced })
}

/// One line of the assembly log.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceStep {
    pub step: String,
    pub tag: &'static str,
    pub depth: usize,
    /// Formal degree read from the factors (no expansion).
    pub degree: u32,
    pub terms: usize,
}

impl fmt::Display for TraceStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:indent$}{} [{}] degree={} terms={}", "", self.step, self.tag, self.degree, self.terms, indent = 2 * self.depth)
    }
}

/// `(1 + expand(t)) F = I_n + expand(v)`.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixCertificate {
    pub t: PreorderWitness,
    pub v: PreorderWitness,
    pub trace: Vec<TraceStep>,
}

impl MatrixCertificate {
    /// `1 + expand(t)`.
    pub fn multiplier(&self) -> Poly {
        Poly::one(self.t.nvars()) + self.t.expand().get(0, 0).clone()
    }
}

fn log(trace: &mut Vec<TraceStep>, depth: usize, step: &str, tag: &'static str, w: &PreorderWitness) {
    trace.push(TraceStep { step: step.to_string(), tag, depth, degree: w.formal_degree(), terms: w.term_count() });
}

fn scalar(w: &PreorderWitness) -> Poly {
    w.expand().get(0, 0).clone()
}

fn sos_block(constraints: &Arc<ConstraintSet>, sos: SosWitness) -> Result<PreorderWitness> {
    PreorderWitness::from_sos(constraints.clone(), sos)
}

fn check(ok: bool, step: &'static str, detail: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Assembly { step, detail: detail.to_string() })
    }
}

/// Lifts certificates for `f11` and `K = f11 H - g^T g` to one for the
/// permuted matrix `[[f11, g], [g^T, H]]`:
/// with `v = 1 + c` from the bound `c I - g~^T g~ = sigma`, `g~ = (1 + s1) g`,
/// the multiplier is `v (1 + v) (1 + s) (1 + s1) (1 + u1)^3`.
pub fn lift_step(
    split: &SchurSplit,
    pivot_cert: &ScalarCertificate,
    inner: &MatrixCertificate,
    constraints: &Arc<ConstraintSet>,
    depth: usize,
) -> Result<MatrixCertificate> {
    let n = split.h.rows() + 1;
    let m = n - 1;
    let nvars = split.f11.nvars();
    let mut trace = Vec::new();
    check(verify_scalar_cert(&split.f11, pivot_cert), "pivot certificate", "(1 + s1) f11 = 1 + u1 does not hold")?;
    check(
        inner.t.size() == 1 && inner.v.size() == m && verify_matrix_identity(&split.reduced, &inner.t, &inner.v),
        "reduced certificate",
        "(1 + s) K = I + U does not hold",
    )?;
    let (s1, u1) = (&pivot_cert.t, &pivot_cert.u);
    let (s, u) = (&inner.t, &inner.v);
    let one = Poly::one(nvars);
    let two = Rational::from_integer(2.into());
    let s1p = scalar(s1);
    let u1p = scalar(u1);
    let one_u1 = &one + &u1p;
    let id_m = sos_block(constraints, SosWitness::identity(m, nvars))?;

    // (1 + s)(1 + u1)^2 - 1 = s (1 + u1)^2 + 2 u1 + u1^2
    let two_u1_sq = u1.scale(&two)?.add(&PreorderWitness::preorder_mul(u1, u1)?)?;
    let w11 = s.congruence(&MatPoly::from_poly(one_u1.clone()))?.add(&two_u1_sq)?;
    // (1 + s1)^2 (I + U) - I = (1 + s1)^2 U + (2 s1 + s1^2) I
    let two_s1_sq = s1.scale(&two)?.add(&PreorderWitness::preorder_mul(s1, s1)?)?;
    let w22 = u
        .congruence(&MatPoly::scalar_diag(m, &(&one + &s1p)))?
        .add(&PreorderWitness::preorder_mul(&two_s1_sq, &id_m)?)?;
    check(
        scalar(&w11) == (&one + &scalar(s)) * one_u1.pow(2) - one.clone(),
        "diagonal factor",
        "(1 + s)(1 + u1)^2 - 1",
    )?;
    check(
        w22.expand() == u.one_plus().expand().scale_by_poly(&(&one + &s1p).pow(2))?.sub(&MatPoly::identity(m, nvars))?,
        "diagonal factor",
        "(1 + s1)^2 (I + U) - I",
    )?;

    let e1 = MatPoly::identity(n, nvars).submatrix(0, 1, 0, n);
    let e2 = MatPoly::identity(n, nvars).submatrix(1, n, 0, n);
    let w = w11.congruence(&e1)?.add(&w22.congruence(&e2)?)?.compact()?;
    log(&mut trace, depth, "W", "diagonal-factor", &w);

    let g_t = split.g.scale_by_poly(&(&one + &s1p))?;
    let tri = MatPoly::block2x2(
        &MatPoly::from_poly(one_u1.clone()),
        &g_t,
        &MatPoly::zeros(m, 1, nvars),
        &MatPoly::scalar_diag(m, &one_u1),
    )?;
    let w_prime = w.congruence(&tri)?.compact()?;
    log(&mut trace, depth, "W'", "triangular-congruence", &w_prime);

    let bound = lemma_bound(&g_t)?;
    let c = sos_block(constraints, bound.c_sos())?;
    let sigma = sos_block(constraints, bound.sos.clone())?;
    log(&mut trace, depth, "sigma", "uniform-bound", &sigma);

    let v = c.one_plus();
    let vp = scalar(&v);
    let one_v = v.one_plus();
    let vv1 = PreorderWitness::preorder_mul(&v, &one_v)?;
    log(&mut trace, depth, "v", "bound-shift", &v);
    let w_pp = PreorderWitness::preorder_mul(&vv1, &w_prime)?;
    log(&mut trace, depth, "W''", "scaled-factor", &w_pp);

    // v (1 + u1)^2 - 1 = c (1 + u1)^2 + 2 u1 + u1^2
    let d11 = c.congruence(&MatPoly::from_poly(one_u1.clone()))?.add(&two_u1_sq)?;
    // (1 + v)(1 + v (2 u1 + u1^2)) - 1 = v (1 + u1)^2 + v^2 (2 u1 + u1^2) - 1 + 1
    let diag = v
        .congruence(&MatPoly::from_poly(one_u1.clone()))?
        .add(&two_u1_sq.congruence(&MatPoly::from_poly(vp.clone()))?)?;
    let d22 = PreorderWitness::preorder_mul(&diag, &id_m)?.add(&PreorderWitness::preorder_mul(&one_v, &sigma)?)?;
    let mut row = MatPoly::zeros(1, n, nvars);
    row.set(0, 0, &vp * &one_u1);
    for j in 0..m {
        row.set(0, j + 1, (&one + &vp) * g_t.get(0, j).clone());
    }
    let rank_one = sos_block(constraints, SosWitness::from_terms(n, nvars, vec![(Rational::one(), row)])?)?;
    let v_total = d11
        .congruence(&e1)?
        .add(&d22.congruence(&e2)?)?
        .add(&rank_one)?
        .add(&w_pp)?;
    log(&mut trace, depth, "V", "assembled", &v_total);

    // 1 + t' = (1 + t)(1 + f) gives t' = t + f + t f
    let mut t = vv1.strip_identity()?.compact()?;
    for f in [s, s1, u1, u1, u1] {
        t = t.add(f)?.add(&PreorderWitness::preorder_mul(&t, f)?)?.compact()?;
    }
    log(&mut trace, depth, "t", "multiplier", &t);

    let cert = MatrixCertificate { t, v: v_total, trace };
    check(verify_matrix_identity(&split.permuted(), &cert.t, &cert.v), "final identity", "(1 + t) F = I + V")?;
    Ok(cert)
}

fn verify_matrix_identity(f: &MatPoly, t: &PreorderWitness, v: &PreorderWitness) -> bool {
    let n = f.rows();
    if t.size() != 1 || v.size() != n || t.nvars() != f.nvars() || v.nvars() != f.nvars() {
        return false;
    }
    let one_t = Poly::one(f.nvars()) + scalar(t);
    match (f.scale_by_poly(&one_t), MatPoly::identity(n, f.nvars()).add(&v.expand())) {
        (Ok(lhs), Ok(rhs)) => lhs == rhs,
        _ => false,
    }
}

/// Exact check of `(1 + t) F = I_n + V` with both witnesses over `S`.
pub fn verify_matrix_cert(f: &MatPoly, cert: &MatrixCertificate, constraints: &ConstraintSet) -> bool {
    if f.rows() != f.cols() || !f.is_symmetric().unwrap_or(false) {
        return false;
    }
    **cert.t.constraints() == *constraints && **cert.v.constraints() == *constraints && verify_matrix_identity(f, &cert.t, &cert.v)
}

fn rows_label(rows: &[usize]) -> String {
    let s: Vec<String> = rows.iter().map(|r| (r + 1).to_string()).collect();
    format!("rows {{{}}}", s.join(","))
}

fn in_block(rows: &[usize], e: Error) -> Error {
    match e {
        e @ Error::Recursion { .. } => e,
        e => Error::Recursion { path: rows_label(rows), source: Box::new(e) },
    }
}

fn certify_rec(
    f: &MatPoly,
    constraints: &Arc<ConstraintSet>,
    cfg: &ProviderConfig,
    policy: PivotPolicy,
    rows: &[usize],
    depth: usize,
) -> Result<MatrixCertificate> {
    let n = f.rows();
    let nvars = f.nvars();
    if n == 1 {
        let c = certify_scalar(f.get(0, 0), constraints, cfg).map_err(|e| in_block(rows, e))?;
        let mut trace = Vec::new();
        log(&mut trace, depth, &format!("scalar {}", rows_label(rows)), "scalar-certificate", &c.t);
        return Ok(MatrixCertificate { t: c.t, v: c.u, trace });
    }
    if let Some(c) = f.as_constant() {
        let mut shifted = c.clone();
        for i in 0..n {
            let d = shifted.get(i, i) - Rational::one();
            shifted.set(i, i, d);
        }
        if psd_ldlt(&shifted).is_psd {
            let v = sos_block(constraints, gram_to_sos(&shifted, &[Monomial::one(nvars)], n, nvars)?)?;
            let t = PreorderWitness::empty(1, constraints.clone());
            let mut trace = Vec::new();
            log(&mut trace, depth, &format!("constant {}", rows_label(rows)), "constant-shortcut", &v);
            return Ok(MatrixCertificate { t, v, trace });
        }
    }
    let split = schur_split(f, policy)?;
    let sub_rows: Vec<usize> = split.perm[1..].iter().map(|&i| rows[i]).collect();
    let pivot_row = rows[split.perm[0]];
    let mut trace = vec![TraceStep {
        step: format!("split {} pivot {}", rows_label(rows), pivot_row + 1),
        tag: "schur-split",
        depth,
        degree: split.reduced.degree().unwrap_or(0),
        terms: 0,
    }];
    let pivot_cert = certify_scalar(&split.f11, constraints, cfg).map_err(|e| in_block(&[pivot_row], e))?;
    log(&mut trace, depth, "pivot", "pivot-certificate", &pivot_cert.u);
    let inner = certify_rec(&split.reduced, constraints, cfg, policy, &sub_rows, depth + 1)?;
    trace.extend(inner.trace.iter().cloned());
    let lifted = lift_step(&split, &pivot_cert, &inner, constraints, depth)?;
    trace.extend(lifted.trace);
    let p = MatPoly::permutation(&split.perm, nvars);
    let v = lifted.v.congruence(&p)?;
    let cert = MatrixCertificate { t: lifted.t, v, trace };
    // the lifted identity holds for F' = P F P^T, so it holds for F = P^T F' P
    let back = p.transpose().mul(&split.permuted())?.mul(&p)?;
    check(back == *f && cert.v.size() == n, "pivot permutation", "P^T F' P = F")?;
    Ok(cert)
}

/// Certifies `F` with the default pivot policy.
pub fn certify_matrix(f: &MatPoly, constraints: &Arc<ConstraintSet>, cfg: &ProviderConfig) -> Result<MatrixCertificate> {
    certify_matrix_with(f, constraints, cfg, PivotPolicy::default())
}

/// Certifies `F` by recursion on principal blocks. Provider failures carry the
/// rows of the block that failed. The result is verified against `F` itself.
pub fn certify_matrix_with(
    f: &MatPoly,
    constraints: &Arc<ConstraintSet>,
    cfg: &ProviderConfig,
    policy: PivotPolicy,
) -> Result<MatrixCertificate> {
    if f.rows() != f.cols() {
        return Err(Error::NotSquare(f.rows(), f.cols()));
    }
    if !f.is_symmetric()? {
        return Err(Error::NotSymmetric);
    }
    if f.nvars() != constraints.nvars() {
        return Err(Error::VarMismatch { left: f.nvars(), right: constraints.nvars() });
    }
    let rows: Vec<usize> = (0..f.rows()).collect();
    let cert = certify_rec(f, constraints, cfg, policy, &rows, 0)?;
    check(verify_matrix_cert(f, &cert, constraints), "final identity", "(1 + t) F = I + V")?;
    Ok(cert)
}

/// Outcome of [`soundness_sample`].
#[derive(Clone, Debug, PartialEq)]
pub struct SoundnessReport {
    pub attempted: usize,
    pub accepted: usize,
    /// Points where `min eig F(x) < 1 / (1 + t(x)) - tol`: `(x, min eig, bound)`.
    pub failures: Vec<(Vec<f64>, f64, f64)>,
}

impl SoundnessReport {
    pub fn passed(&self) -> bool {
        self.accepted > 0 && self.failures.is_empty()
    }
}

impl fmt::Display for SoundnessReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.accepted == 0 {
            return write!(f, "no sample points in the set ({} attempts)", self.attempted);
        }
        write!(f, "{} of {} sampled points satisfy the bound", self.accepted - self.failures.len(), self.accepted)
    }
}

/// Rejection-samples grid points `lo + (hi - lo) k / 2^16` of the box that lie
/// in `K_S`, up to `num_points` accepted points (at most `1000 * num_points`
/// draws), and compares the smallest eigenvalue of `F(x)` with `1 / (1 + t(x))`.
pub fn soundness_sample(
    f: &MatPoly,
    cert: &MatrixCertificate,
    constraints: &ConstraintSet,
    num_points: usize,
    bounds: (f64, f64),
    tol: f64,
    seed: u64,
) -> Result<SoundnessReport> {
    let d = f.nvars();
    let lo = Rational::from_float(bounds.0).ok_or_else(|| Error::NonPositive(format!("box bound {}", bounds.0)))?;
    let hi = Rational::from_float(bounds.1).ok_or_else(|| Error::NonPositive(format!("box bound {}", bounds.1)))?;
    let steps: i64 = 1 << 16;
    let width = (&hi - &lo) / Rational::from_integer(steps.into());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t = cert.t.expand().get(0, 0).clone();
    let mut report = SoundnessReport { attempted: 0, accepted: 0, failures: Vec::new() };
    while report.accepted < num_points && report.attempted < 1000 * num_points.max(1) {
        report.attempted += 1;
        let coords: Vec<Rational> = (0..d).map(|_| &lo + &width * Rational::from_integer(rng.gen_range(0..=steps).into())).collect();
        let x = RatPoint::new(coords);
        if !constraints.contains(&x)? {
            continue;
        }
        report.accepted += 1;
        let fx = f.eval(&x)?.to_f64();
        let min_eig = SymmetricEigen::new(fx).eigenvalues.min();
        let tx = t.eval(x.coords())?;
        if tx.is_negative() {
            report.failures.push((x.to_f64(), min_eig, f64::NAN));
            continue;
        }
        let bound = 1.0 / (1.0 + to_f64(&tx));
        if min_eig < bound - tol {
            report.failures.push((x.to_f64(), min_eig, bound));
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::rat_int;
    use crate::witness::ExponentVector;

    fn x() -> Poly {
        Poly::var(1, 0)
    }

    fn worked() -> MatPoly {
        MatPoly::from_rows(vec![vec![Poly::from_int(1, 2), x()], vec![x(), Poly::one(1) + x().pow(2)]]).unwrap()
    }

    fn none() -> Arc<ConstraintSet> {
        Arc::new(ConstraintSet::empty(1))
    }

    #[test]
    fn split_examples() {
        let s = schur_split(&worked(), PivotPolicy::MinDegree).unwrap();
        assert_eq!(s.f11, Poly::from_int(1, 2));
        assert_eq!(s.g, MatPoly::from_poly(x()));
        assert_eq!(s.reduced, MatPoly::from_poly(Poly::from_int(1, 2) + x().pow(2)));
        assert_eq!(s.permuted(), worked());

        let s = schur_split(&MatPoly::identity(2, 1), PivotPolicy::MinDegree).unwrap();
        assert_eq!((s.f11.clone(), s.g.clone(), s.h.clone()), (Poly::one(1), MatPoly::zeros(1, 1, 1), MatPoly::identity(1, 1)));

        let diag = MatPoly::from_rows(vec![vec![x().pow(2) + Poly::one(1), Poly::zero(1)], vec![Poly::zero(1), Poly::from_int(1, 2)]]).unwrap();
        let s = schur_split(&diag, PivotPolicy::MinDegree).unwrap();
        assert_eq!(s.perm, vec![1, 0]);
        assert_eq!(s.f11, Poly::from_int(1, 2));
        assert_eq!(schur_split(&diag, PivotPolicy::First).unwrap().perm, vec![0, 1]);
    }

    #[test]
    fn worked_instance_multiplier() {
        let c = certify_matrix(&worked(), &none(), &ProviderConfig::default()).unwrap();
        let x2 = x().pow(2);
        let expected = (Poly::from_int(1, 2) + x2.clone()) * (Poly::from_int(1, 3) + x2) * Poly::from_int(1, 8);
        assert_eq!(c.multiplier(), expected);
        assert!(verify_matrix_cert(&worked(), &c, &ConstraintSet::empty(1)));
        assert!(!c.trace.is_empty());
    }

    #[test]
    fn identity_and_scaled_identity() {
        for n in 1..=3 {
            let c = certify_matrix(&MatPoly::identity(n, 1), &none(), &ProviderConfig::default()).unwrap();
            assert!(c.t.expand().is_zero() && c.v.expand().is_zero());
        }
        let f = MatPoly::scalar_diag(2, &Poly::from_int(1, 2));
        let c = certify_matrix(&f, &none(), &ProviderConfig::default()).unwrap();
        assert!(verify_matrix_cert(&f, &c, &ConstraintSet::empty(1)));
    }

    #[test]
    fn non_positive_pivot_fails_with_path() {
        let f = MatPoly::from_rows(vec![vec![x(), Poly::zero(1)], vec![Poly::zero(1), Poly::one(1)]]).unwrap();
        let mut cfg = ProviderConfig::default();
        cfg.search.degree_cap = 2;
        match certify_matrix(&f, &none(), &cfg) {
            Err(Error::Recursion { path, .. }) => assert_eq!(path, "rows {1}"),
            other => panic!("unexpected {:?}", other),
        }
    }

    #[test]
    fn corrupt_pivot_certificate_is_assembly_error() {
        let s = schur_split(&worked(), PivotPolicy::MinDegree).unwrap();
        let cs = none();
        let mut pc = crate::scalar::certify_constant(&rat_int(2), &cs).unwrap();
        pc.u = pc.u.scale(&rat_int(2)).unwrap();
        let inner = certify_matrix(&s.reduced, &cs, &ProviderConfig::default()).unwrap();
        match lift_step(&s, &pc, &inner, &cs, 0) {
            Err(Error::Assembly { step, .. }) => assert_eq!(step, "pivot certificate"),
            other => panic!("unexpected {:?}", other),
        }
    }

    #[test]
    fn pivot_permutation_is_undone() {
        let f = MatPoly::from_rows(vec![vec![Poly::one(1) + x().pow(2), x()], vec![x(), Poly::from_int(1, 2)]]).unwrap();
        for policy in [PivotPolicy::MinDegree, PivotPolicy::First] {
            let c = certify_matrix_with(&f, &none(), &ProviderConfig::default(), policy).unwrap();
            assert!(verify_matrix_cert(&f, &c, &ConstraintSet::empty(1)));
        }
    }

    #[test]
    fn wrong_target_and_mutation_rejected() {
        let c = certify_matrix(&worked(), &none(), &ProviderConfig::default()).unwrap();
        let other = MatPoly::scalar_diag(2, &Poly::from_int(1, 2));
        assert!(!verify_matrix_cert(&other, &c, &ConstraintSet::empty(1)));
        let mut bad = c.clone();
        let extra = PreorderWitness::from_sos(none(), SosWitness::identity(2, 1)).unwrap();
        bad.v = bad.v.add(&extra).unwrap();
        assert!(!verify_matrix_cert(&worked(), &bad, &ConstraintSet::empty(1)));
        assert!(c.v.blocks().keys().all(|e| *e == ExponentVector::zero(0)));
    }

    #[test]
    fn soundness_reports() {
        let c = certify_matrix(&worked(), &none(), &ProviderConfig::default()).unwrap();
        let r = soundness_sample(&worked(), &c, &ConstraintSet::empty(1), 100, (-2.0, 2.0), 1e-6, 7).unwrap();
        assert!(r.passed());
        assert_eq!(r.accepted, 100);

        let s = ConstraintSet::new(1, vec![x(), -x()]).unwrap();
        let id = MatrixCertificate {
            t: PreorderWitness::empty(1, Arc::new(s.clone())),
            v: PreorderWitness::empty(2, Arc::new(s.clone())),
            trace: vec![],
        };
        let r = soundness_sample(&MatPoly::identity(2, 1), &id, &s, 10, (1.0, 2.0), 1e-6, 7).unwrap();
        assert_eq!(r.accepted, 0);
        assert!(!r.passed());

        let r = soundness_sample(&MatPoly::identity(2, 1), &id, &s, 10, (-1.0, 1.0), 1e-6, 7).unwrap();
        assert!(r.failures.is_empty());
    }
}
