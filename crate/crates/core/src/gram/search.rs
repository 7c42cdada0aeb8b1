//! Certificate search for `F - eps I_n` in `T_S^n` or `M_S^n`.

use std::sync::Arc;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::matpoly::MatPoly;
use crate::poly::{Poly, Rational};
use crate::witness::{ConstraintSet, PreorderWitness, SosWitness};

use super::rationalize::{rationalize, DEFAULT_LADDER};
use super::solve::{FeasibilitySolver, SolveError, SolverConfig};
use super::system::{build_gram_system, witness_from_blocks, GramSystem, Mode};

#[derive(Clone, Debug, PartialEq)]
pub struct SearchConfig {
    pub solver: SolverConfig,
    /// Largest SOS-multiplier degree tried.
    pub degree_cap: u32,
    /// Exponents `k` of the `2^k` denominators tried during rationalization.
    pub ladder: Vec<u32>,
    pub eps_iters: u32,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig { solver: SolverConfig::default(), degree_cap: 8, ladder: DEFAULT_LADDER.to_vec(), eps_iters: 20 }
    }
}

/// `F - eps I_n = expand(witness)`.
#[derive(Clone, Debug)]
pub struct EpsCertificate {
    pub eps: Rational,
    pub witness: PreorderWitness,
    pub mode: Mode,
    pub degree: u32,
}

/// Relative size below which a diagonal entry or the margin counts as zero.
const FACE_TOL: f64 = 1e-7;

/// Numeric solve followed by exact rationalization. When the solution has no
/// eigenvalue margin, basis elements whose diagonal entries vanish are removed
/// and the smaller system is solved again.
pub(crate) fn solve_exact(sys: &GramSystem, cfg: &SearchConfig) -> Result<Vec<SosWitness>> {
    let mut current = sys.clone();
    for _ in 0..6 {
        let sol = match FeasibilitySolver::new(&current).and_then(|s| s.solve(&cfg.solver)) {
            Ok(sol) => sol,
            Err(SolveError::Breakdown(msg)) => return Err(Error::NumericBreakdown(msg)),
            Err(e @ SolveError::NotConverged { .. }) => return Err(Error::NotFound(e.to_string())),
        };
        let scale = sol.scale();
        if sol.margin() > FACE_TOL * scale {
            let mats = rationalize(&sol, &current, &cfg.ladder)?;
            return current.blocks_to_sos(&mats);
        }
        let drop: Vec<Vec<usize>> = sol
            .blocks
            .iter()
            .map(|g| (0..g.nrows()).filter(|&i| g[(i, i)] < FACE_TOL * scale).collect())
            .collect();
        if drop.iter().all(Vec::is_empty) {
            let mats = rationalize(&sol, &current, &cfg.ladder)?;
            return current.blocks_to_sos(&mats);
        }
        current = match current.restrict(&drop) {
            Ok(s) => s,
            Err(e @ Error::DegreeTooSmall(_)) => return Err(Error::NotFound(e.to_string())),
            Err(e) => return Err(e),
        };
    }
    Err(Error::NotFound("facial reduction did not settle".into()))
}

/// Degrees `max(deg F rounded up to even, 2), +2, ...` up to the cap.
pub fn degree_schedule(deg: u32, cap: u32) -> Vec<u32> {
    let start = (deg + deg % 2).max(2);
    (start..=cap.max(start)).step_by(2).filter(|d| *d <= cap).collect()
}

fn shifted(f: &MatPoly, eps: &Rational) -> MatPoly {
    let n = f.rows();
    f.sub(&MatPoly::scalar_diag(n, &Poly::constant(f.nvars(), eps.clone()))).expect("square")
}

/// Searches for `eps > 0` with `F - eps I_n` in `T_S^n` (or `M_S^n`). For each
/// degree of the schedule, `eps = 1` is tried first; otherwise `eps` is bisected
/// between `2^-20` and the failed upper end. Every returned witness has been
/// verified exactly.
pub fn matrix_sos_search(f: &MatPoly, constraints: Arc<ConstraintSet>, mode: Mode, cfg: &SearchConfig) -> Result<EpsCertificate> {
    if !f.is_symmetric()? {
        return Err(Error::NotSymmetric);
    }
    let deg = f.degree().unwrap_or(0);
    let lo_start = Rational::new(1.into(), num_bigint::BigInt::one() << 20u32);
    let mut diagnostics = Vec::new();
    for degree in degree_schedule(deg, cfg.degree_cap) {
        let base = match build_gram_system(&shifted(f, &Rational::one()), &constraints, mode, degree) {
            Ok(s) => s,
            Err(e @ Error::DegreeTooSmall(_)) => {
                diagnostics.push(format!("degree {}: {}", degree, e));
                continue;
            }
            Err(e) => return Err(e),
        };
        let attempt = |eps: &Rational| -> Result<Option<PreorderWitness>> {
            let target = shifted(f, eps);
            let sys = base.retarget(&target)?;
            match solve_exact(&sys, cfg) {
                Ok(sos) => {
                    let w = witness_from_blocks(&sys, constraints.clone(), sos)?;
                    Ok(w.verify_membership(&target).then_some(w))
                }
                Err(Error::NumericBreakdown(m)) => Err(Error::NumericBreakdown(m)),
                Err(_) => Ok(None),
            }
        };
        let one = Rational::one();
        if let Some(w) = attempt(&one)? {
            return Ok(EpsCertificate { eps: one, witness: w, mode, degree });
        }
        let Some(mut best_w) = attempt(&lo_start)? else {
            diagnostics.push(format!("degree {}: no certificate at eps = 2^-20", degree));
            continue;
        };
        let mut best = lo_start.clone();
        let (mut lo, mut hi) = (lo_start.clone(), one);
        let two = Rational::from_integer(2.into());
        for _ in 0..cfg.eps_iters {
            let mid = (&lo + &hi) / &two;
            match attempt(&mid)? {
                Some(w) => {
                    best = mid.clone();
                    best_w = w;
                    lo = mid;
                }
                None => hi = mid,
            }
        }
        debug_assert!(!best.is_zero());
        return Ok(EpsCertificate { eps: best, witness: best_w, mode, degree });
    }
    Err(Error::NotFound(if diagnostics.is_empty() { "empty degree schedule".into() } else { diagnostics.join("; ") }))
}

/// Exact check `F - eps I_n = expand(w)` with `eps > 0`, plus the module shape.
pub fn verify_eps_certificate(f: &MatPoly, cert: &EpsCertificate) -> bool {
    use num_traits::Signed;
    cert.eps.is_positive()
        && (cert.mode == Mode::Preorder || cert.witness.is_qmodule())
        && cert.witness.verify_membership(&shifted(f, &cert.eps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{rat, rat_int};

    fn x() -> Poly {
        Poly::var(1, 0)
    }

    #[test]
    fn schedule() {
        assert_eq!(degree_schedule(0, 8), vec![2, 4, 6, 8]);
        assert_eq!(degree_schedule(3, 8), vec![4, 6, 8]);
        assert_eq!(degree_schedule(9, 8), Vec::<u32>::new());
    }

    #[test]
    fn constant_two_identity_reaches_one() {
        let f = MatPoly::scalar_diag(2, &Poly::from_int(1, 2));
        let cfg = SearchConfig::default();
        let c = matrix_sos_search(&f, Arc::new(ConstraintSet::empty(1)), Mode::Preorder, &cfg).unwrap();
        assert_eq!(c.eps, rat_int(1));
        assert!(verify_eps_certificate(&f, &c));
    }

    #[test]
    fn one_plus_x_squared_matrix() {
        let f = MatPoly::from_rows(vec![
            vec![Poly::one(1) + x().pow(2), x()],
            vec![x(), Poly::from_int(1, 2)],
        ])
        .unwrap();
        let s = Arc::new(ConstraintSet::new(1, vec![Poly::one(1) - x().pow(2)]).unwrap());
        let c = matrix_sos_search(&f, s.clone(), Mode::Preorder, &SearchConfig::default()).unwrap();
        assert!(c.eps >= rat(1, 64));
        assert!(verify_eps_certificate(&f, &c));
        let q = matrix_sos_search(&f, s, Mode::QModule, &SearchConfig::default()).unwrap();
        assert!(q.witness.is_qmodule());
        assert!(verify_eps_certificate(&f, &q));
    }

    #[test]
    fn indefinite_target_is_not_found() {
        let f = MatPoly::from_poly(x());
        let mut cfg = SearchConfig::default();
        cfg.degree_cap = 2;
        cfg.eps_iters = 2;
        assert!(matches!(
            matrix_sos_search(&f, Arc::new(ConstraintSet::empty(1)), Mode::Preorder, &cfg),
            Err(Error::NotFound(_))
        ));
    }

    #[test]
    fn tampered_certificate_rejected() {
        let f = MatPoly::scalar_diag(2, &Poly::from_int(1, 2));
        let mut c = matrix_sos_search(&f, Arc::new(ConstraintSet::empty(1)), Mode::Preorder, &SearchConfig::default()).unwrap();
        c.eps = rat(1, 2);
        assert!(!verify_eps_certificate(&f, &c));
    }
}
