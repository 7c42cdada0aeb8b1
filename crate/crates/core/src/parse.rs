//! Text input: polynomial expressions and problem files.
//!
//! Problem grammar (statements end in `;`, `#` starts a comment):
//!
//! ```text
//! vars 2;                 # or: vars 2 x y;
//! constraint 1 - x1^2 - x2^2;
//! target matrix [[2, x1], [x1, 1 + x1^2]];   # or: target poly <expr>;
//! ```
//!
//! Expressions use `+ - * / ^`, parentheses, integer literals and variable
//! names. Division is only allowed by nonzero constants and `^` takes a
//! nonnegative integer literal.

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::matpoly::MatPoly;
use crate::poly::{default_names, Poly, Rational};
use crate::witness::ConstraintSet;

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Tok {
    Int(BigInt),
    Ident(String),
    Sym(char),
    Eof,
}

#[derive(Clone, Debug)]
pub(crate) struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

pub(crate) fn tokenize(text: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let (mut line, mut col) = (1, 1);
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        let (l0, c0) = (line, col);
        if c == '\n' {
            chars.next();
            line += 1;
            col = 1;
        } else if c.is_whitespace() {
            chars.next();
            col += 1;
        } else if c == '#' {
            while let Some(&c) = chars.peek() {
                if c == '\n' {
                    break;
                }
                chars.next();
                col += 1;
            }
        } else if c.is_ascii_digit() {
            let mut s = String::new();
            while let Some(&d) = chars.peek() {
                if !d.is_ascii_digit() {
                    break;
                }
                s.push(d);
                chars.next();
                col += 1;
            }
            out.push(Token { tok: Tok::Int(s.parse().expect("digits")), line: l0, col: c0 });
        } else if c.is_alphabetic() || c == '_' {
            let mut s = String::new();
            while let Some(&d) = chars.peek() {
                if !(d.is_alphanumeric() || d == '_') {
                    break;
                }
                s.push(d);
                chars.next();
                col += 1;
            }
            out.push(Token { tok: Tok::Ident(s), line: l0, col: c0 });
        } else if "+-*/^()[],;:".contains(c) {
            chars.next();
            col += 1;
            out.push(Token { tok: Tok::Sym(c), line: l0, col: c0 });
        } else {
            return Err(Error::Parse { line: l0, col: c0, msg: format!("unexpected character '{}'", c) });
        }
    }
    out.push(Token { tok: Tok::Eof, line, col });
    Ok(out)
}

/// Recursive-descent reader over a token stream.
pub(crate) struct Cursor<'a> {
    toks: Vec<Token>,
    pos: usize,
    names: &'a [String],
}

impl<'a> Cursor<'a> {
    pub fn new(text: &str, names: &'a [String]) -> Result<Self> {
        Ok(Cursor { toks: tokenize(text)?, pos: 0, names })
    }

    pub fn with_names(&self, names: &'a [String]) -> Cursor<'a> {
        Cursor { toks: self.toks.clone(), pos: self.pos, names }
    }

    pub fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    pub fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    pub fn error_here(&self, msg: impl Into<String>) -> Error {
        let t = self.peek();
        Error::Parse { line: t.line, col: t.col, msg: msg.into() }
    }

    pub fn at_eof(&self) -> bool {
        self.peek().tok == Tok::Eof
    }

    pub fn is_sym(&self, c: char) -> bool {
        self.peek().tok == Tok::Sym(c)
    }

    pub fn is_ident(&self, s: &str) -> bool {
        matches!(&self.peek().tok, Tok::Ident(t) if t == s)
    }

    pub fn expect_sym(&mut self, c: char) -> Result<()> {
        if self.is_sym(c) {
            self.next();
            Ok(())
        } else {
            Err(self.error_here(format!("expected '{}'", c)))
        }
    }

    pub fn expect_ident(&mut self) -> Result<String> {
        match &self.peek().tok {
            Tok::Ident(s) => {
                let s = s.clone();
                self.next();
                Ok(s)
            }
            _ => Err(self.error_here("expected identifier")),
        }
    }

    pub fn expect_keyword(&mut self, kw: &str) -> Result<()> {
        if self.is_ident(kw) {
            self.next();
            Ok(())
        } else {
            Err(self.error_here(format!("expected '{}'", kw)))
        }
    }

    pub fn expect_uint(&mut self) -> Result<u64> {
        match &self.peek().tok {
            Tok::Int(v) => {
                let v = v.to_u64().ok_or_else(|| self.error_here("integer too large"))?;
                self.next();
                Ok(v)
            }
            _ => Err(self.error_here("expected integer")),
        }
    }

    /// Optionally signed rational literal `a` or `a/b`.
    pub fn rational(&mut self) -> Result<Rational> {
        let neg = if self.is_sym('-') {
            self.next();
            true
        } else {
            false
        };
        let num = match &self.peek().tok {
            Tok::Int(v) => v.clone(),
            _ => return Err(self.error_here("expected rational number")),
        };
        self.next();
        let den = if self.is_sym('/') {
            self.next();
            match &self.peek().tok {
                Tok::Int(v) if !v.is_zero() => {
                    let v = v.clone();
                    self.next();
                    v
                }
                _ => return Err(self.error_here("expected nonzero denominator")),
            }
        } else {
            BigInt::from(1)
        };
        let r = Rational::new(num, den);
        Ok(if neg { -r } else { r })
    }

    fn nvars(&self) -> usize {
        self.names.len()
    }

    pub fn expr(&mut self) -> Result<Poly> {
        let mut acc = self.term()?;
        loop {
            if self.is_sym('+') {
                self.next();
                acc = acc + self.term()?;
            } else if self.is_sym('-') {
                self.next();
                acc = acc - self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Poly> {
        let mut acc = self.unary()?;
        loop {
            if self.is_sym('*') {
                self.next();
                acc = acc * self.unary()?;
            } else if self.is_sym('/') {
                self.next();
                let at = self.peek().clone();
                let d = self.unary()?;
                match d.as_constant() {
                    Some(c) if !c.is_zero() => acc = acc.scale(&(Rational::from_integer(1.into()) / c)),
                    Some(_) => return Err(Error::Parse { line: at.line, col: at.col, msg: "division by zero".into() }),
                    None => {
                        return Err(Error::Parse { line: at.line, col: at.col, msg: "division by a non-constant polynomial".into() })
                    }
                }
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<Poly> {
        if self.is_sym('-') {
            self.next();
            return Ok(-self.unary()?);
        }
        if self.is_sym('+') {
            self.next();
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Poly> {
        let base = self.atom()?;
        if self.is_sym('^') {
            self.next();
            let e = self.expect_uint()?;
            let e = u32::try_from(e).map_err(|_| self.error_here("exponent too large"))?;
            return Ok(base.pow(e));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Poly> {
        let t = self.peek().clone();
        match t.tok {
            Tok::Int(v) => {
                self.next();
                Ok(Poly::constant(self.nvars(), Rational::from_integer(v)))
            }
            Tok::Ident(name) => match self.names.iter().position(|n| *n == name) {
                Some(i) => {
                    self.next();
                    Ok(Poly::var(self.nvars(), i))
                }
                None => Err(Error::Parse { line: t.line, col: t.col, msg: format!("unknown variable '{}'", name) }),
            },
            Tok::Sym('(') => {
                self.next();
                let p = self.expr()?;
                self.expect_sym(')')?;
                Ok(p)
            }
            _ => Err(self.error_here("expected number, variable or '('")),
        }
    }

    /// `[[e, e], [e, e]]`; rows must have equal length.
    pub fn matrix(&mut self) -> Result<MatPoly> {
        let start = self.peek().clone();
        self.expect_sym('[')?;
        let mut rows = Vec::new();
        loop {
            self.expect_sym('[')?;
            let mut row = vec![self.expr()?];
            while self.is_sym(',') {
                self.next();
                row.push(self.expr()?);
            }
            self.expect_sym(']')?;
            rows.push(row);
            if self.is_sym(',') {
                self.next();
            } else {
                break;
            }
        }
        self.expect_sym(']')?;
        MatPoly::from_rows(rows).map_err(|e| Error::Parse { line: start.line, col: start.col, msg: e.to_string() })
    }
}

/// Parses a single polynomial expression over the given variable names.
pub fn parse_poly(text: &str, names: &[String]) -> Result<Poly> {
    let mut c = Cursor::new(text, names)?;
    let p = c.expr()?;
    if !c.at_eof() {
        return Err(c.error_here("unexpected trailing input"));
    }
    Ok(p)
}

/// Parses `[[...], ...]` over the given variable names.
pub fn parse_matrix(text: &str, names: &[String]) -> Result<MatPoly> {
    let mut c = Cursor::new(text, names)?;
    let m = c.matrix()?;
    if !c.at_eof() {
        return Err(c.error_here("unexpected trailing input"));
    }
    Ok(m)
}

#[derive(Clone, Debug, PartialEq)]
pub enum Target {
    Poly(Poly),
    Matrix(MatPoly),
}

/// `(F, S)` or `(f, S)` read from a problem file.
#[derive(Clone, Debug, PartialEq)]
pub struct ProblemFile {
    pub names: Vec<String>,
    pub constraints: Vec<Poly>,
    pub target: Target,
}

impl ProblemFile {
    pub fn nvars(&self) -> usize {
        self.names.len()
    }

    /// The target as a matrix; a scalar target becomes `1 x 1`.
    pub fn target_matrix(&self) -> MatPoly {
        match &self.target {
            Target::Poly(p) => MatPoly::from_poly(p.clone()),
            Target::Matrix(m) => m.clone(),
        }
    }

    pub fn constraint_set(&self) -> Result<ConstraintSet> {
        ConstraintSet::new(self.nvars(), self.constraints.clone())
    }
}

/// Parses a problem file. Matrix targets must be symmetric.
pub fn parse_problem(text: &str) -> Result<ProblemFile> {
    parse_problem_with(text, true)
}

/// As [`parse_problem`]; `require_symmetric = false` accepts rectangular or
/// non-symmetric matrix targets (used for bounding `B^T B`).
pub fn parse_problem_with(text: &str, require_symmetric: bool) -> Result<ProblemFile> {
    let empty: Vec<String> = Vec::new();
    let mut c = Cursor::new(text, &empty)?;
    c.expect_keyword("vars")?;
    let d = c.expect_uint()? as usize;
    let mut names = Vec::new();
    while !c.is_sym(';') {
        let at = c.peek().clone();
        let n = c.expect_ident()?;
        if names.contains(&n) {
            return Err(Error::Parse { line: at.line, col: at.col, msg: format!("duplicate variable '{}'", n) });
        }
        names.push(n);
        if c.is_sym(',') {
            c.next();
        }
    }
    if names.is_empty() {
        names = default_names(d);
    } else if names.len() != d {
        return Err(c.error_here(format!("expected {} variable names, found {}", d, names.len())));
    }
    c.expect_sym(';')?;
    let mut c = c.with_names(&names);
    let mut constraints = Vec::new();
    while c.is_ident("constraint") {
        c.next();
        constraints.push(c.expr()?);
        c.expect_sym(';')?;
    }
    c.expect_keyword("target")?;
    let target = if c.is_ident("poly") {
        c.next();
        Target::Poly(c.expr()?)
    } else if c.is_ident("matrix") {
        c.next();
        let at = c.peek().clone();
        let m = c.matrix()?;
        if require_symmetric && !(m.rows() == m.cols() && m.is_symmetric()?) {
            return Err(Error::Parse { line: at.line, col: at.col, msg: "matrix target is not symmetric".into() });
        }
        Target::Matrix(m)
    } else {
        return Err(c.error_here("expected 'poly' or 'matrix'"));
    };
    c.expect_sym(';')?;
    if !c.at_eof() {
        return Err(c.error_here("unexpected input after target"));
    }
    Ok(ProblemFile { names, constraints, target })
}
