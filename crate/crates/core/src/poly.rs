//! Sparse multivariate polynomials with exact rational coefficients.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Rational = num_rational::BigRational;

/// Builds an exact rational from a numerator and denominator.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn rat_int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

/// Exponent vector of a monomial. Ordered graded-lexicographically:
/// total degree first, then lexicographic on the exponents (`x1 > x2`).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn new(exponents: Vec<u32>) -> Self {
        Monomial(exponents)
    }

    pub fn one(nvars: usize) -> Self {
        Monomial(vec![0; nvars])
    }

    pub fn var(nvars: usize, index: usize) -> Self {
        let mut e = vec![0; nvars];
        e[index] = 1;
        Monomial(e)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn nvars(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// Square root if every exponent is even.
    pub fn sqrt(&self) -> Option<Monomial> {
        if self.0.iter().all(|e| e % 2 == 0) {
            Some(Monomial(self.0.iter().map(|e| e / 2).collect()))
        } else {
            None
        }
    }

    pub fn eval(&self, point: &[Rational]) -> Rational {
        let mut acc = Rational::one();
        for (x, &e) in point.iter().zip(&self.0) {
            if e > 0 {
                acc *= num_traits::pow(x.clone(), e as usize);
            }
        }
        acc
    }

    /// All monomials in `nvars` variables of total degree at most `max_degree`,
    /// ascending in graded-lex order.
    pub fn all_up_to(nvars: usize, max_degree: u32) -> Vec<Monomial> {
        let mut out = Vec::new();
        for deg in 0..=max_degree {
            let mut level = Vec::new();
            let mut cur = vec![0u32; nvars];
            compositions(nvars, deg, 0, &mut cur, &mut level);
            level.sort();
            out.extend(level);
        }
        out
    }

    pub(crate) fn fmt_with(&self, names: &[String], f: &mut impl fmt::Write) -> fmt::Result {
        let mut first = true;
        for (i, &e) in self.0.iter().enumerate() {
            if e == 0 {
                continue;
            }
            if !first {
                f.write_char('*')?;
            }
            first = false;
            f.write_str(&names[i])?;
            if e > 1 {
                write!(f, "^{}", e)?;
            }
        }
        if first {
            f.write_char('1')?;
        }
        Ok(())
    }
}

fn compositions(nvars: usize, remaining: u32, pos: usize, cur: &mut Vec<u32>, out: &mut Vec<Monomial>) {
    if nvars == 0 {
        if remaining == 0 {
            out.push(Monomial(Vec::new()));
        }
        return;
    }
    if pos == nvars - 1 {
        cur[pos] = remaining;
        out.push(Monomial(cur.clone()));
        cur[pos] = 0;
        return;
    }
    for e in 0..=remaining {
        cur[pos] = e;
        compositions(nvars, remaining - e, pos + 1, cur, out);
    }
    cur[pos] = 0;
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Default variable names `x1..xd`.
pub fn default_names(nvars: usize) -> Vec<String> {
    (1..=nvars).map(|i| format!("x{}", i)).collect()
}

/// A polynomial in `nvars` variables. Zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Monomial, Rational>,
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Poly { nvars, terms: BTreeMap::new() }
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, Rational::one())
    }

    pub fn constant(nvars: usize, c: Rational) -> Self {
        let mut p = Self::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(Monomial::one(nvars), c);
        }
        p
    }

    pub fn from_int(nvars: usize, c: i64) -> Self {
        Self::constant(nvars, rat_int(c))
    }

    /// The variable `x_{index+1}` (zero-based index).
    pub fn var(nvars: usize, index: usize) -> Self {
        assert!(index < nvars, "variable index {} out of range for {} variables", index, nvars);
        Self::monomial(Monomial::var(nvars, index), Rational::one())
    }

    pub fn monomial(m: Monomial, c: Rational) -> Self {
        let nvars = m.nvars();
        let mut p = Self::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(m, c);
        }
        p
    }

    /// Builds a polynomial from (monomial, coefficient) pairs, merging duplicates.
    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Monomial, Rational)>) -> Result<Self> {
        let mut p = Self::zero(nvars);
        for (m, c) in terms {
            if m.nvars() != nvars {
                return Err(Error::VarMismatch { left: nvars, right: m.nvars() });
            }
            p.add_term(m, c);
        }
        Ok(p)
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in ascending graded-lex order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn constant_term(&self) -> Rational {
        self.coeff(&Monomial::one(self.nvars))
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().next_back().map(Monomial::degree)
    }

    pub fn is_constant(&self) -> bool {
        self.degree().map_or(true, |d| d == 0)
    }

    pub fn as_constant(&self) -> Option<Rational> {
        if self.is_constant() {
            Some(self.constant_term())
        } else {
            None
        }
    }

    pub(crate) fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    fn check(&self, other: &Poly) -> Result<()> {
        if self.nvars != other.nvars {
            Err(Error::VarMismatch { left: self.nvars, right: other.nvars })
        } else {
            Ok(())
        }
    }

    pub fn try_add(&self, other: &Poly) -> Result<Poly> {
        self.check(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &Poly) -> Result<Poly> {
        self.check(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c.clone());
        }
        Ok(out)
    }

    pub fn try_mul(&self, other: &Poly) -> Result<Poly> {
        self.check(other)?;
        let mut out = Poly::zero(self.nvars);
        out.add_product(self, other, None);
        Ok(out)
    }

    /// `self += w * a * b` in place (`w = 1` when `None`). Variable counts
    /// must agree.
    pub(crate) fn add_product(&mut self, a: &Poly, b: &Poly, w: Option<&Rational>) {
        self.add_int_product(&IntPoly::new(a), &IntPoly::new(b), w);
    }

    /// As [`add_product`](Self::add_product) on integer forms: the product is
    /// formed over the integers and each resulting coefficient is normalized
    /// once.
    pub(crate) fn add_int_product(&mut self, a: &IntPoly, b: &IntPoly, w: Option<&Rational>) {
        if a.terms.is_empty() || b.terms.is_empty() {
            return;
        }
        let mut acc: BTreeMap<Monomial, BigInt> = BTreeMap::new();
        for (ma, ca) in &a.terms {
            for (mb, cb) in &b.terms {
                *acc.entry(ma.mul(mb)).or_insert_with(BigInt::zero) += ca * cb;
            }
        }
        let den = Rational::from_integer(&a.den * &b.den);
        let scale = match w {
            Some(w) => w / den,
            None => den.recip(),
        };
        for (m, c) in acc {
            if !c.is_zero() {
                self.add_term(m, &scale * Rational::from_integer(c));
            }
        }
    }

    /// `self += other` in place.
    pub(crate) fn add_assign_poly(&mut self, other: &Poly) {
        debug_assert_eq!(self.nvars, other.nvars);
        for (m, c) in &other.terms {
            self.add_term(m.clone(), c.clone());
        }
    }

    pub fn scale(&self, c: &Rational) -> Poly {
        if c.is_zero() {
            return Poly::zero(self.nvars);
        }
        Poly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect(),
        }
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut acc = Poly::one(self.nvars);
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    pub fn eval(&self, point: &[Rational]) -> Result<Rational> {
        if point.len() != self.nvars {
            return Err(Error::DimMismatch { expected: self.nvars, found: point.len() });
        }
        let mut acc = Rational::zero();
        for (m, c) in &self.terms {
            acc += c * m.eval(point);
        }
        Ok(acc)
    }

    pub fn eval_f64(&self, point: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(m, c)| {
                let mv: f64 = m
                    .exponents()
                    .iter()
                    .zip(point)
                    .map(|(&e, &x)| x.powi(e as i32))
                    .product();
                crate::poly::to_f64(c) * mv
            })
            .sum()
    }

    /// Leading coefficient sign and degree for the positive-leading check used in
    /// degree accounting.
    pub fn leading_term(&self) -> Option<(&Monomial, &Rational)> {
        self.terms.iter().next_back()
    }

    /// Homogeneous component of top degree.
    pub fn leading_form(&self) -> Poly {
        let mut out = Poly::zero(self.nvars);
        if let Some(d) = self.degree() {
            for (m, c) in &self.terms {
                if m.degree() == d {
                    out.terms.insert(m.clone(), c.clone());
                }
            }
        }
        out
    }

    pub fn map_coeffs(&self, f: impl Fn(&Rational) -> Rational) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), f(c));
        }
        out
    }

    pub fn display_with<'a>(&'a self, names: &'a [String]) -> PolyDisplay<'a> {
        PolyDisplay { poly: self, names }
    }
}

pub fn to_f64(r: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or_else(|| {
        // huge numerators/denominators: scale through the integer ratio
        let n = r.numer().to_f64().unwrap_or(f64::INFINITY);
        let d = r.denom().to_f64().unwrap_or(f64::INFINITY);
        n / d
    })
}

/// Writes a rational as `n` or `n/d`.
pub fn fmt_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub struct PolyDisplay<'a> {
    poly: &'a Poly,
    names: &'a [String],
}

impl fmt::Display for PolyDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.poly.is_zero() {
            return f.write_str("0");
        }
        // descending graded-lex
        for (i, (m, c)) in self.poly.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            if i == 0 {
                if neg {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if neg { " - " } else { " + " })?;
            }
            if m.is_one() {
                f.write_str(&fmt_rational(&abs))?;
            } else {
                if !abs.is_one() {
                    write!(f, "{}*", fmt_rational(&abs))?;
                }
                m.fmt_with(self.names, f)?;
            }
        }
        Ok(())
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = default_names(self.nvars);
        write!(f, "{}", self.display_with(&names))
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident, $inner:ident) => {
        impl $tr<&Poly> for &Poly {
            type Output = Poly;
            fn $method(self, rhs: &Poly) -> Poly {
                self.$inner(rhs).expect("polynomial variable counts differ")
            }
        }
        impl $tr<Poly> for Poly {
            type Output = Poly;
            fn $method(self, rhs: Poly) -> Poly {
                (&self).$inner(&rhs).expect("polynomial variable counts differ")
            }
        }
        impl $tr<&Poly> for Poly {
            type Output = Poly;
            fn $method(self, rhs: &Poly) -> Poly {
                (&self).$inner(rhs).expect("polynomial variable counts differ")
            }
        }
    };
}

forward_binop!(Add, add, try_add);
forward_binop!(Sub, sub, try_sub);
forward_binop!(Mul, mul, try_mul);

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.map_coeffs(|c| -c.clone())
    }
}

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        -&self
    }
}

/// `terms / den` with integer coefficients over the least common denominator.
pub(crate) struct IntPoly {
    den: BigInt,
    terms: Vec<(Monomial, BigInt)>,
}

impl IntPoly {
    pub(crate) fn new(p: &Poly) -> Self {
        let mut den = BigInt::one();
        for c in p.terms.values() {
            den = den.lcm(c.denom());
        }
        let terms = p.terms.iter().map(|(m, c)| (m.clone(), c.numer() * (&den / c.denom()))).collect();
        IntPoly { den, terms }
    }
}

/// A rational point of `R^d`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatPoint(pub Vec<Rational>);

impl RatPoint {
    pub fn new(coords: Vec<Rational>) -> Self {
        RatPoint(coords)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[Rational] {
        &self.0
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(to_f64).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(d: usize, i: usize) -> Poly {
        Poly::var(d, i)
    }

    #[test]
    fn difference_of_squares() {
        let one = Poly::one(1);
        let p = (&one + &x(1, 0)) * (&one - &x(1, 0));
        let expected = &one - &x(1, 0).pow(2);
        assert_eq!(p, expected);
        assert_eq!(p.degree(), Some(2));
    }

    #[test]
    fn archimedean_p_by_additions() {
        let p = Poly::one(2) + x(2, 0).pow(2) + x(2, 1).pow(2);
        assert_eq!(p.len(), 3);
        assert_eq!(p.to_string(), "x1^2 + x2^2 + 1");
    }

    #[test]
    fn additive_identity_and_zero_coefficients() {
        let f = Poly::from_int(1, 3) + x(1, 0);
        assert_eq!(&f + &Poly::zero(1), f);
        assert!((&f - &f).is_zero());
        assert_eq!((&f - &f).degree(), None);
    }

    #[test]
    fn var_mismatch_is_error() {
        assert!(matches!(
            Poly::one(1).try_add(&Poly::one(2)),
            Err(Error::VarMismatch { .. })
        ));
    }

    #[test]
    fn evaluation() {
        let f = Poly::one(1) + x(1, 0).pow(2);
        assert_eq!(f.eval(&[rat_int(3)]).unwrap(), rat_int(10));
        assert_eq!(Poly::zero(2).eval(&[rat(1, 3), rat(5, 7)]).unwrap(), rat_int(0));
        let g = x(2, 0) * x(2, 1) - Poly::from_int(2, 2);
        assert_eq!(g.eval(&[rat(1, 2), rat_int(4)]).unwrap(), rat_int(0));
        assert!(matches!(g.eval(&[rat_int(1)]), Err(Error::DimMismatch { .. })));
    }

    #[test]
    fn grlex_order_and_printing() {
        let f = Poly::from_int(2, 1) - x(2, 1) + x(2, 0) * x(2, 1).scale(&rat(3, 2)) + x(2, 0).pow(2);
        assert_eq!(f.to_string(), "x1^2 + 3/2*x1*x2 - x2 + 1");
        let ms = Monomial::all_up_to(2, 2);
        let printed: Vec<String> =
            ms.iter().map(|m| Poly::monomial(m.clone(), rat_int(1)).to_string()).collect();
        assert_eq!(printed, ["1", "x2", "x1", "x2^2", "x1*x2", "x1^2"]);
    }

    #[test]
    fn monomial_enumeration_counts() {
        assert_eq!(Monomial::all_up_to(3, 3).len(), 20);
        assert_eq!(Monomial::all_up_to(0, 4).len(), 1);
        assert_eq!(Monomial::all_up_to(1, 4).len(), 5);
    }
}
