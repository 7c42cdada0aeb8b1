//! Line-oriented certificate files.
//!
//! ```text
//! psatz-certificate 1
//! kind matrix-krivine
//! vars x1
//! size 2
//! meta degree 4
//! witness t 1
//! block []
//! term 8 [[x1^2 + 3]]
//! end
//! witness V 2
//! ...
//! end
//! ```
//!
//! Rationals are written `num/den`, polynomials in descending graded-lex
//! order, so equal certificates serialize to identical bytes.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::str::FromStr;
use std::sync::Arc;

use num_traits::Signed;

use crate::error::{Error, Result};
use crate::gram::{verify_eps_certificate, EpsCertificate, Mode};
use crate::matpoly::MatPoly;
use crate::parse::Cursor;
use crate::poly::{fmt_rational, Poly, Rational};
use crate::scalar::{verify_scalar_cert, ScalarCertificate};
use crate::schur::{verify_matrix_cert, MatrixCertificate};
use crate::witness::{ConstraintSet, ExponentVector, PreorderWitness, SosWitness};

const MAGIC: &str = "psatz-certificate";
const VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CertKind {
    /// `(1 + t) f = 1 + u`.
    ScalarKrivine,
    /// `(1 + t) F = I + V`.
    MatrixKrivine,
    /// `F - eps I` in the preordering.
    EpsPreorder,
    /// `F - eps I` in the quadratic module.
    EpsQModule,
}

impl CertKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CertKind::ScalarKrivine => "scalar-krivine",
            CertKind::MatrixKrivine => "matrix-krivine",
            CertKind::EpsPreorder => "eps-preorder",
            CertKind::EpsQModule => "eps-qmodule",
        }
    }
}

impl FromStr for CertKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "scalar-krivine" => Ok(CertKind::ScalarKrivine),
            "matrix-krivine" => Ok(CertKind::MatrixKrivine),
            "eps-preorder" => Ok(CertKind::EpsPreorder),
            "eps-qmodule" => Ok(CertKind::EpsQModule),
            _ => Err(format!("unknown certificate kind '{}'", s)),
        }
    }
}

/// Parsed or to-be-written certificate, independent of its kind.
#[derive(Clone, Debug, PartialEq)]
pub struct CertificateFile {
    pub kind: CertKind,
    pub names: Vec<String>,
    pub constraints: Vec<Poly>,
    pub size: usize,
    pub meta: BTreeMap<String, String>,
    pub witnesses: Vec<(String, PreorderWitness)>,
}

fn names_of(nvars: usize, names: Option<&[String]>) -> Vec<String> {
    match names {
        Some(n) => n.to_vec(),
        None => crate::poly::default_names(nvars),
    }
}

impl CertificateFile {
    pub fn from_scalar(c: &ScalarCertificate, names: Option<&[String]>) -> Self {
        let cs = c.t.constraints();
        CertificateFile {
            kind: CertKind::ScalarKrivine,
            names: names_of(cs.nvars(), names),
            constraints: cs.generators().to_vec(),
            size: 1,
            meta: BTreeMap::new(),
            witnesses: vec![("t".into(), c.t.clone()), ("u".into(), c.u.clone())],
        }
    }

    pub fn from_matrix(c: &MatrixCertificate, names: Option<&[String]>) -> Self {
        let cs = c.t.constraints();
        CertificateFile {
            kind: CertKind::MatrixKrivine,
            names: names_of(cs.nvars(), names),
            constraints: cs.generators().to_vec(),
            size: c.v.size(),
            meta: BTreeMap::new(),
            witnesses: vec![("t".into(), c.t.clone()), ("V".into(), c.v.clone())],
        }
    }

    pub fn from_eps(c: &EpsCertificate, names: Option<&[String]>) -> Self {
        let cs = c.witness.constraints();
        let mut meta = BTreeMap::new();
        meta.insert("eps".to_string(), fmt_rational(&c.eps));
        meta.insert("degree".to_string(), c.degree.to_string());
        CertificateFile {
            kind: if c.mode == Mode::Preorder { CertKind::EpsPreorder } else { CertKind::EpsQModule },
            names: names_of(cs.nvars(), names),
            constraints: cs.generators().to_vec(),
            size: c.witness.size(),
            meta,
            witnesses: vec![("W".into(), c.witness.clone())],
        }
    }

    pub fn nvars(&self) -> usize {
        self.names.len()
    }

    fn witness(&self, name: &str) -> Result<&PreorderWitness> {
        self.witnesses
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, w)| w)
            .ok_or_else(|| Error::MalformedWitness(format!("missing witness '{}'", name)))
    }

    fn expect_kind(&self, kinds: &[CertKind]) -> Result<()> {
        if kinds.contains(&self.kind) {
            Ok(())
        } else {
            Err(Error::MalformedWitness(format!("unexpected certificate kind {}", self.kind.as_str())))
        }
    }

    /// Rebinds a witness to the caller's constraint set, which must list the
    /// same generators.
    fn rebind(&self, w: &PreorderWitness, constraints: &Arc<ConstraintSet>) -> Result<PreorderWitness> {
        if w.constraints().as_ref() != constraints.as_ref() {
            return Err(Error::ConstraintMismatch);
        }
        let mut out = PreorderWitness::empty(w.size(), constraints.clone());
        for (e, s) in w.blocks() {
            out.add_block(e.clone(), s.clone())?;
        }
        Ok(out)
    }

    pub fn into_scalar(&self, constraints: &Arc<ConstraintSet>) -> Result<ScalarCertificate> {
        self.expect_kind(&[CertKind::ScalarKrivine])?;
        Ok(ScalarCertificate { t: self.rebind(self.witness("t")?, constraints)?, u: self.rebind(self.witness("u")?, constraints)? })
    }

    pub fn into_matrix(&self, constraints: &Arc<ConstraintSet>) -> Result<MatrixCertificate> {
        self.expect_kind(&[CertKind::MatrixKrivine, CertKind::ScalarKrivine])?;
        let second = if self.kind == CertKind::ScalarKrivine { "u" } else { "V" };
        Ok(MatrixCertificate {
            t: self.rebind(self.witness("t")?, constraints)?,
            v: self.rebind(self.witness(second)?, constraints)?,
            trace: Vec::new(),
        })
    }

    pub fn into_eps(&self, constraints: &Arc<ConstraintSet>) -> Result<EpsCertificate> {
        self.expect_kind(&[CertKind::EpsPreorder, CertKind::EpsQModule])?;
        let eps_text = self.meta.get("eps").ok_or_else(|| Error::MalformedWitness("missing eps".into()))?;
        let names: Vec<String> = Vec::new();
        let mut c = Cursor::new(eps_text, &names)?;
        let eps = c.rational()?;
        if !c.at_eof() {
            return Err(Error::MalformedWitness(format!("bad eps '{}'", eps_text)));
        }
        let degree = match self.meta.get("degree") {
            Some(d) => d.parse().map_err(|_| Error::MalformedWitness(format!("bad degree '{}'", d)))?,
            None => 0,
        };
        let mode = if self.kind == CertKind::EpsPreorder { Mode::Preorder } else { Mode::QModule };
        Ok(EpsCertificate { eps, witness: self.rebind(self.witness("W")?, constraints)?, mode, degree })
    }

    /// Exact check of the certificate against the target `F` (a `1 x 1`
    /// matrix for scalar certificates).
    pub fn verify_against(&self, target: &MatPoly, constraints: &Arc<ConstraintSet>) -> Result<bool> {
        Ok(match self.kind {
            CertKind::ScalarKrivine => {
                if target.shape() != (1, 1) {
                    return Err(Error::ShapeMismatch { op: "verify", left: (1, 1), right: target.shape() });
                }
                verify_scalar_cert(target.get(0, 0), &self.into_scalar(constraints)?)
            }
            CertKind::MatrixKrivine => verify_matrix_cert(target, &self.into_matrix(constraints)?, constraints),
            CertKind::EpsPreorder | CertKind::EpsQModule => verify_eps_certificate(target, &self.into_eps(constraints)?),
        })
    }

    /// Parses the text format. Witnesses are rebuilt through the checked
    /// constructors, so negative weights or shape errors are rejected here.
    pub fn parse(text: &str) -> Result<CertificateFile> {
        let lines: Vec<(usize, &str)> = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
            .collect();
        let mut it = lines.into_iter().peekable();
        let perr = |line: usize, msg: String| Error::Parse { line, col: 1, msg };

        let (ln, first) = it.next().ok_or_else(|| perr(1, "empty certificate".into()))?;
        let mut words = first.split_whitespace();
        if words.next() != Some(MAGIC) {
            return Err(perr(ln, format!("expected '{}'", MAGIC)));
        }
        match words.next().and_then(|v| v.parse::<u32>().ok()) {
            Some(VERSION) => {}
            _ => return Err(perr(ln, format!("unsupported version (expected {})", VERSION))),
        }

        let mut kind = None;
        let mut names: Option<Vec<String>> = None;
        let mut constraint_text = Vec::new();
        let mut size = None;
        let mut meta = BTreeMap::new();
        while let Some(&(ln, line)) = it.peek() {
            let (head, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
            let rest = rest.trim();
            match head {
                "kind" => kind = Some(rest.parse::<CertKind>().map_err(|e| perr(ln, e))?),
                "vars" => names = Some(rest.split_whitespace().map(str::to_string).collect()),
                "constraint" => constraint_text.push((ln, rest.to_string())),
                "size" => size = Some(rest.parse::<usize>().map_err(|_| perr(ln, format!("bad size '{}'", rest)))?),
                "meta" => {
                    let (k, v) = rest.split_once(char::is_whitespace).ok_or_else(|| perr(ln, "meta needs a key and a value".into()))?;
                    meta.insert(k.to_string(), v.trim().to_string());
                }
                "witness" => break,
                _ => return Err(perr(ln, format!("unexpected '{}'", head))),
            }
            it.next();
        }
        let kind = kind.ok_or_else(|| perr(ln, "missing kind".into()))?;
        let names = names.ok_or_else(|| perr(ln, "missing vars".into()))?;
        let size = size.ok_or_else(|| perr(ln, "missing size".into()))?;
        let nvars = names.len();
        let mut constraints = Vec::new();
        for (ln, t) in &constraint_text {
            constraints.push(parse_at(*ln, t, &names, |c| c.expr())?);
        }
        let cs = Arc::new(ConstraintSet::new(nvars, constraints.clone())?);
        let m = cs.len();

        let mut witnesses = Vec::new();
        while let Some((ln, line)) = it.next() {
            let mut words = line.split_whitespace();
            if words.next() != Some("witness") {
                return Err(perr(ln, "expected 'witness'".into()));
            }
            let name = words.next().ok_or_else(|| perr(ln, "witness needs a name".into()))?.to_string();
            let wsize: usize = words
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| perr(ln, "witness needs a size".into()))?;
            let mut w = PreorderWitness::empty(wsize, cs.clone());
            let mut current: Option<(ExponentVector, SosWitness)> = None;
            let mut closed = false;
            for (ln, line) in it.by_ref() {
                let (head, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
                match head {
                    "block" => {
                        if let Some((e, s)) = current.take() {
                            w.add_block(e, s).map_err(|e| perr(ln, e.to_string()))?;
                        }
                        let e = parse_exponent(rest.trim(), m).map_err(|msg| perr(ln, msg))?;
                        current = Some((e, SosWitness::empty(wsize, nvars)));
                    }
                    "term" => {
                        let (_, sos) = current.as_mut().ok_or_else(|| perr(ln, "term outside a block".into()))?;
                        let col = line.len() - rest.len() + 1;
                        let (weight, factor) = parse_term(ln, col, rest, &names)?;
                        if !weight.is_positive() {
                            return Err(perr(ln, format!("weight {} is not positive", weight)));
                        }
                        sos.push(weight, factor).map_err(|e| perr(ln, e.to_string()))?;
                    }
                    "end" => {
                        if let Some((e, s)) = current.take() {
                            w.add_block(e, s).map_err(|e| perr(ln, e.to_string()))?;
                        }
                        closed = true;
                        break;
                    }
                    _ => return Err(perr(ln, format!("unexpected '{}'", head))),
                }
            }
            if !closed {
                return Err(perr(ln, format!("witness '{}' is not closed by 'end'", name)));
            }
            witnesses.push((name, w));
        }
        Ok(CertificateFile { kind, names, constraints, size, meta, witnesses })
    }
}

fn parse_at<T>(line: usize, text: &str, names: &[String], f: impl FnOnce(&mut Cursor) -> Result<T>) -> Result<T> {
    parse_at_col(line, 1, text, names, f)
}

fn parse_at_col<T>(line: usize, col: usize, text: &str, names: &[String], f: impl FnOnce(&mut Cursor) -> Result<T>) -> Result<T> {
    let shift = |e: Error| match e {
        Error::Parse { col: c, msg, .. } => Error::Parse { line, col: col + c - 1, msg },
        e => e,
    };
    let mut c = Cursor::new(text, names).map_err(shift)?;
    let v = f(&mut c).map_err(shift)?;
    if !c.at_eof() {
        return Err(shift(c.error_here("unexpected trailing input")));
    }
    Ok(v)
}

fn parse_term(line: usize, col: usize, text: &str, names: &[String]) -> Result<(Rational, MatPoly)> {
    parse_at_col(line, col, text, names, |c| {
        let w = c.rational()?;
        let m = c.matrix()?;
        Ok((w, m))
    })
}

fn parse_exponent(text: &str, m: usize) -> std::result::Result<ExponentVector, String> {
    let inner = text
        .strip_prefix('[')
        .and_then(|s| s.strip_suffix(']'))
        .ok_or_else(|| format!("bad exponent vector '{}'", text))?;
    let bits: Vec<bool> = if inner.trim().is_empty() {
        Vec::new()
    } else {
        inner
            .split(',')
            .map(|b| match b.trim() {
                "0" => Ok(false),
                "1" => Ok(true),
                other => Err(format!("bad exponent bit '{}'", other)),
            })
            .collect::<std::result::Result<_, _>>()?
    };
    if bits.len() != m {
        return Err(format!("exponent vector has {} entries, expected {}", bits.len(), m));
    }
    Ok(ExponentVector::new(bits))
}

fn write_matrix(out: &mut String, a: &MatPoly, names: &[String]) {
    out.push('[');
    for i in 0..a.rows() {
        if i > 0 {
            out.push_str(", ");
        }
        out.push('[');
        for j in 0..a.cols() {
            if j > 0 {
                out.push_str(", ");
            }
            let _ = write!(out, "{}", a.get(i, j).display_with(names));
        }
        out.push(']');
    }
    out.push(']');
}

impl fmt::Display for CertificateFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        let _ = writeln!(out, "{} {}", MAGIC, VERSION);
        let _ = writeln!(out, "kind {}", self.kind.as_str());
        let _ = writeln!(out, "vars {}", self.names.join(" "));
        for g in &self.constraints {
            let _ = writeln!(out, "constraint {}", g.display_with(&self.names));
        }
        let _ = writeln!(out, "size {}", self.size);
        for (k, v) in &self.meta {
            let _ = writeln!(out, "meta {} {}", k, v);
        }
        for (name, w) in &self.witnesses {
            let _ = writeln!(out, "witness {} {}", name, w.size());
            for (e, sos) in w.blocks() {
                let _ = writeln!(out, "block {}", e);
                for t in sos.terms() {
                    let _ = write!(out, "term {} ", fmt_rational(&t.weight));
                    write_matrix(&mut out, &t.factor, &self.names);
                    out.push('\n');
                }
            }
            out.push_str("end\n");
        }
        f.write_str(&out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{rat, rat_int};
    use crate::scalar::{certify_constant, certify_scalar, ProviderConfig};

    fn x() -> Poly {
        Poly::var(1, 0)
    }

    #[test]
    fn scalar_round_trip() {
        let cs = Arc::new(ConstraintSet::new(1, vec![x(), Poly::one(1) - x()]).unwrap());
        let f = Poly::from_int(1, 2) + x() - x().pow(2);
        let c = certify_scalar(&f, &cs, &ProviderConfig::default()).unwrap();
        let text = CertificateFile::from_scalar(&c, None).to_string();
        let back = CertificateFile::parse(&text).unwrap();
        assert_eq!(back.to_string(), text);
        let c2 = back.into_scalar(&cs).unwrap();
        assert_eq!(c2.t.expand(), c.t.expand());
        assert_eq!(c2.u.expand(), c.u.expand());
    }

    #[test]
    fn fixed_layout() {
        let cs = Arc::new(ConstraintSet::empty(1));
        let c = certify_constant(&rat(1, 2), &cs).unwrap();
        let text = CertificateFile::from_scalar(&c, None).to_string();
        assert_eq!(
            text,
            "psatz-certificate 1\nkind scalar-krivine\nvars x1\nsize 1\nwitness t 1\nblock []\nterm 1 [[1]]\nend\nwitness u 1\nend\n"
        );
    }

    #[test]
    fn rejects_bad_input() {
        let good = "psatz-certificate 1\nkind scalar-krivine\nvars x1\nsize 1\nwitness t 1\nblock []\nterm 1 [[x1]]\nend\nwitness u 1\nend\n";
        assert!(CertificateFile::parse(good).is_ok());
        let neg = good.replace("term 1 [[x1]]", "term -1 [[x1]]");
        assert!(matches!(CertificateFile::parse(&neg), Err(Error::Parse { line: 7, .. })));
        let unknown = good.replace("[[x1]]", "[[y]]");
        assert!(matches!(CertificateFile::parse(&unknown), Err(Error::Parse { line: 7, col: 10, .. })));
        assert!(CertificateFile::parse(&good.replace("block []", "block [1]")).is_err());
        assert!(CertificateFile::parse(&good.replace("kind scalar-krivine", "kind other")).is_err());
        assert!(CertificateFile::parse(&good.replacen("end\n", "", 2)).is_err());
        assert!(CertificateFile::parse(&good.replace("psatz-certificate 1", "psatz-certificate 9")).is_err());
    }

    #[test]
    fn constraint_mismatch_detected() {
        let cs = Arc::new(ConstraintSet::new(1, vec![x()]).unwrap());
        let c = certify_constant(&rat_int(3), &cs).unwrap();
        let file = CertificateFile::parse(&CertificateFile::from_scalar(&c, None).to_string()).unwrap();
        let other = Arc::new(ConstraintSet::new(1, vec![-x()]).unwrap());
        assert_eq!(file.into_scalar(&other), Err(Error::ConstraintMismatch));
    }
}
