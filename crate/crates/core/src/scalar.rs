//! Scalar certificates `(1 + t) f = 1 + u` with `t, u` in the preordering.

use std::path::PathBuf;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::gram::{solve_exact, GramBlock, GramSystem, SearchConfig};
use crate::matpoly::MatPoly;
use crate::poly::{Monomial, Poly, Rational};
use crate::witness::{ConstraintSet, PreorderWitness, SosWitness};

/// `(1 + expand(t)) f = 1 + expand(u)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarCertificate {
    pub t: PreorderWitness,
    pub u: PreorderWitness,
}

impl ScalarCertificate {
    pub fn t_poly(&self) -> Poly {
        self.t.expand().get(0, 0).clone()
    }

    pub fn u_poly(&self) -> Poly {
        self.u.expand().get(0, 0).clone()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Strategy {
    /// Constant shortcut, then trivial, then the file (if one is configured),
    /// then numeric.
    Auto,
    Trivial,
    File,
    Numeric,
}

impl std::str::FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "auto" => Ok(Strategy::Auto),
            "trivial" => Ok(Strategy::Trivial),
            "file" => Ok(Strategy::File),
            "numeric" => Ok(Strategy::Numeric),
            _ => Err(format!("unknown strategy '{}'", s)),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProviderConfig {
    pub strategy: Strategy,
    /// Scalar certificate file read by the file strategy.
    pub cert_path: Option<PathBuf>,
    /// Degree cap, solver and rationalization settings of the numeric strategy.
    pub search: SearchConfig,
}

impl Default for ProviderConfig {
    fn default() -> Self {
        ProviderConfig { strategy: Strategy::Auto, cert_path: None, search: SearchConfig::default() }
    }
}

fn constant_witness(c: &Rational, constraints: &Arc<ConstraintSet>) -> Result<PreorderWitness> {
    let nvars = constraints.nvars();
    PreorderWitness::from_sos(constraints.clone(), SosWitness::scalar_square(c.clone(), Poly::one(nvars))?)
}

/// For `c >= 1`: `t = 0`, `u = c - 1`. For `0 < c < 1`: `t = (1 - c) / c`, `u = 0`.
pub fn certify_constant(c: &Rational, constraints: &Arc<ConstraintSet>) -> Result<ScalarCertificate> {
    if !c.is_positive() {
        return Err(Error::NonPositive(c.to_string()));
    }
    let one = Rational::one();
    let (t, u) = if *c >= one { (Rational::zero(), c - &one) } else { ((&one - c) / c, Rational::zero()) };
    Ok(ScalarCertificate { t: constant_witness(&t, constraints)?, u: constant_witness(&u, constraints)? })
}

/// From `t f = 1 + u` builds `t' = t + u`, `u' = u + t f^2`, using
/// `(1 + t + u) f = t f + (1 + u) f = 1 + u + t f^2`.
pub fn normalize_from_tf(t: &PreorderWitness, u: &PreorderWitness, f: &Poly) -> Result<ScalarCertificate> {
    if t.size() != 1 || u.size() != 1 {
        return Err(Error::ShapeMismatch { op: "normalize_from_tf", left: (t.size(), u.size()), right: (1, 1) });
    }
    let tf = t.expand().get(0, 0) * f;
    let one_u = Poly::one(f.nvars()) + u.expand().get(0, 0).clone();
    if tf != one_u {
        return Err(Error::IdentityFailed("t f = 1 + u does not hold".into()));
    }
    let cert = ScalarCertificate { t: t.add(u)?, u: u.add(&t.congruence(&MatPoly::from_poly(f.clone()))?)? };
    debug_assert!(verify_scalar_cert(f, &cert));
    Ok(cert)
}

/// Exact identity check plus structural agreement of `t` and `u`.
pub fn verify_scalar_cert(f: &Poly, c: &ScalarCertificate) -> bool {
    if c.t.size() != 1 || c.u.size() != 1 || c.t.nvars() != f.nvars() || c.u.nvars() != f.nvars() {
        return false;
    }
    if c.t.constraints() != c.u.constraints() {
        return false;
    }
    let one = Poly::one(f.nvars());
    (&one + &c.t_poly()) * f.clone() == one + c.u_poly()
}

/// Succeeds when `f` has a positive constant term and otherwise only
/// monomials with even exponents and positive coefficients. Then
/// `t = max(0, 1/f(0) - 1)` and `u = (1 + t) f - 1` is a weighted sum of
/// squared monomials.
pub fn certify_trivial(f: &Poly, constraints: &Arc<ConstraintSet>) -> Result<ScalarCertificate> {
    let nvars = f.nvars();
    let c0 = f.constant_term();
    if !c0.is_positive() {
        return Err(Error::NotFound("trivial: constant term is not positive".into()));
    }
    let mut roots = Vec::new();
    for (m, c) in f.terms() {
        if m.is_one() {
            continue;
        }
        match m.sqrt() {
            Some(r) if c.is_positive() => roots.push((r, c.clone())),
            _ => return Err(Error::NotFound("trivial: f is not a positive combination of even monomials".into())),
        }
    }
    let one = Rational::one();
    let t = if c0 >= one { Rational::zero() } else { &one / &c0 - &one };
    let scale = &one + &t;
    let mut u = SosWitness::empty(1, nvars);
    u.push(&scale * &c0 - &one, MatPoly::identity(1, nvars))?;
    for (r, c) in roots {
        u.push(&scale * &c, MatPoly::from_poly(Poly::monomial(r, one.clone())))?;
    }
    let cert = ScalarCertificate { t: constant_witness(&t, constraints)?, u: PreorderWitness::from_sos(constraints.clone(), u)? };
    if !verify_scalar_cert(f, &cert) {
        return Err(Error::IdentityFailed("trivial certificate".into()));
    }
    Ok(cert)
}

/// Gram blocks of the joint system `t f - u = 1 - f` at `t`-degree `d`.
fn joint_system(f: &Poly, constraints: &ConstraintSet, d: u32) -> Result<GramSystem> {
    let nvars = f.nvars();
    let deg_f = f.degree().unwrap_or(0);
    let t_basis = Monomial::all_up_to(nvars, d / 2);
    let u_basis = Monomial::all_up_to(nvars, (d + deg_f).div_ceil(2));
    let exps = constraints.exponent_vectors(true);
    let mut blocks = Vec::with_capacity(2 * exps.len());
    for e in &exps {
        let g = constraints.product(e);
        blocks.push(GramBlock::new(e.clone(), &g * f, t_basis.clone(), 1));
    }
    for e in &exps {
        let g = constraints.product(e);
        blocks.push(GramBlock::new(e.clone(), -g, u_basis.clone(), 1));
    }
    GramSystem::new(&MatPoly::from_poly(Poly::one(nvars) - f.clone()), blocks)
}

/// Numeric search over `t`-degrees `0, 2, ..., degree_cap` of the joint Gram
/// system, rationalized and verified exactly.
pub fn certify_numeric(f: &Poly, constraints: &Arc<ConstraintSet>, cfg: &SearchConfig) -> Result<ScalarCertificate> {
    let mut notes = Vec::new();
    for d in (0..=cfg.degree_cap).step_by(2) {
        let sys = match joint_system(f, constraints, d) {
            Ok(s) => s,
            Err(e @ Error::DegreeTooSmall(_)) => {
                notes.push(format!("degree {}: {}", d, e));
                continue;
            }
            Err(e) => return Err(e),
        };
        let sos = match solve_exact(&sys, cfg) {
            Ok(s) => s,
            Err(e @ Error::NumericBreakdown(_)) => return Err(e),
            Err(e) => {
                notes.push(format!("degree {}: {}", d, e));
                continue;
            }
        };
        let half = sos.len() / 2;
        let mut t = PreorderWitness::empty(1, constraints.clone());
        let mut u = PreorderWitness::empty(1, constraints.clone());
        for (i, (blk, s)) in sys.blocks().iter().zip(sos).enumerate() {
            if i < half {
                t.add_block(blk.exponent.clone(), s)?;
            } else {
                u.add_block(blk.exponent.clone(), s)?;
            }
        }
        let cert = ScalarCertificate { t, u };
        if verify_scalar_cert(f, &cert) {
            return Ok(cert);
        }
        notes.push(format!("degree {}: exact check failed", d));
    }
    Err(Error::NotFound(format!("numeric: {}", notes.join("; "))))
}

fn certify_file(f: &Poly, constraints: &Arc<ConstraintSet>, cfg: &ProviderConfig) -> Result<ScalarCertificate> {
    let path = cfg.cert_path.as_ref().ok_or_else(|| Error::NotFound("file: no certificate path given".into()))?;
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {}", path.display(), e)))?;
    let cert = crate::format::CertificateFile::parse(&text)?.into_scalar(constraints)?;
    if !verify_scalar_cert(f, &cert) {
        return Err(Error::NotFound(format!("file: certificate in {} does not match this polynomial", path.display())));
    }
    Ok(cert)
}

/// Dispatches on the configured strategy. Every returned certificate has
/// passed [`verify_scalar_cert`].
pub fn certify_scalar(f: &Poly, constraints: &Arc<ConstraintSet>, cfg: &ProviderConfig) -> Result<ScalarCertificate> {
    if f.nvars() != constraints.nvars() {
        return Err(Error::VarMismatch { left: f.nvars(), right: constraints.nvars() });
    }
    match cfg.strategy {
        Strategy::Trivial => {
            if let Some(c) = f.as_constant().filter(|c| c.is_positive()) {
                return certify_constant(&c, constraints);
            }
            certify_trivial(f, constraints)
        }
        Strategy::File => certify_file(f, constraints, cfg),
        Strategy::Numeric => certify_numeric(f, constraints, &cfg.search),
        Strategy::Auto => {
            if let Some(c) = f.as_constant().filter(|c| c.is_positive()) {
                return certify_constant(&c, constraints);
            }
            let mut notes = Vec::new();
            match certify_trivial(f, constraints) {
                Ok(c) => return Ok(c),
                Err(e) => notes.push(e.to_string()),
            }
            if cfg.cert_path.is_some() {
                match certify_file(f, constraints, cfg) {
                    Ok(c) => return Ok(c),
                    Err(e) => notes.push(e.to_string()),
                }
            }
            match certify_numeric(f, constraints, &cfg.search) {
                Ok(c) => Ok(c),
                Err(e @ Error::NumericBreakdown(_)) => Err(e),
                Err(e) => {
                    notes.push(e.to_string());
                    Err(Error::NotFound(notes.join("; ")))
                }
            }
        }
    }
}
