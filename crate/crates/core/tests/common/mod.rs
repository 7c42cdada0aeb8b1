#![allow(dead_code)]

use std::sync::Arc;

use num_bigint::BigInt;
use psatz::gram::EpsCertificate;
use psatz::scalar::ScalarCertificate;
use psatz::schur::MatrixCertificate;
use psatz::{ConstraintSet, MatPoly, Poly, PreorderWitness, Rational, SosWitness};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn var(nvars: usize, i: usize) -> Poly {
    Poly::var(nvars, i)
}

pub fn konst(nvars: usize, c: i64) -> Poly {
    Poly::from_int(nvars, c)
}

pub fn mat(rows: Vec<Vec<Poly>>) -> MatPoly {
    MatPoly::from_rows(rows).unwrap()
}

pub fn set(nvars: usize, gens: Vec<Poly>) -> Arc<ConstraintSet> {
    Arc::new(ConstraintSet::new(nvars, gens).unwrap())
}

/// Random polynomial with integer coefficients in `[-c, c]`, total degree at
/// most `deg`, and about half the monomials present.
pub fn random_poly(rng: &mut ChaCha8Rng, nvars: usize, deg: u32, c: i64) -> Poly {
    let mut p = Poly::zero(nvars);
    for m in psatz::Monomial::all_up_to(nvars, deg) {
        if rng.gen_bool(0.5) {
            let coeff = rng.gen_range(-c..=c);
            p = p + Poly::monomial(m, Rational::from_integer(coeff.into()));
        }
    }
    p
}

pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, nvars: usize, deg: u32, c: i64) -> MatPoly {
    mat((0..rows).map(|_| (0..cols).map(|_| random_poly(rng, nvars, deg, c)).collect()).collect())
}

/// Nonzero rational perturbation `+-(1 + k) / 7`.
fn delta(rng: &mut ChaCha8Rng) -> Rational {
    let k = rng.gen_range(1..=6);
    let s = if rng.gen_bool(0.5) { 1 } else { -1 };
    rat(s * k, 7)
}

/// Copy of `w` with one coefficient changed: either one square's weight is
/// scaled or one coefficient of one factor entry is shifted. Returns `None`
/// when the chosen change leaves the expansion unchanged.
pub fn mutate_witness(w: &PreorderWitness, rng: &mut ChaCha8Rng) -> Option<PreorderWitness> {
    let slots: Vec<(usize, usize)> =
        w.blocks().values().enumerate().flat_map(|(bi, s)| (0..s.len()).map(move |ti| (bi, ti))).collect();
    if slots.is_empty() {
        return None;
    }
    let (tb, tt) = slots[rng.gen_range(0..slots.len())];
    let mut out = PreorderWitness::empty(w.size(), w.constraints().clone());
    for (bi, (e, sos)) in w.blocks().iter().enumerate() {
        let mut terms: Vec<(Rational, MatPoly)> = sos.terms().iter().map(|t| (t.weight.clone(), t.factor.clone())).collect();
        if bi == tb {
            let (weight, factor) = &mut terms[tt];
            if rng.gen_bool(0.5) {
                let k = rng.gen_range(1..=6);
                *weight = &*weight * rat(7 + k, 7);
            } else {
                let idx = rng.gen_range(0..factor.entries().len());
                let entry = &factor.entries()[idx];
                let monos: Vec<psatz::Monomial> = entry.terms().map(|(m, _)| m.clone()).collect();
                let m = if monos.is_empty() || rng.gen_bool(0.2) {
                    psatz::Monomial::one(w.nvars())
                } else {
                    monos[rng.gen_range(0..monos.len())].clone()
                };
                factor.entries_mut()[idx] = entry.clone() + Poly::monomial(m, delta(rng));
            }
        }
        out.add_block(e.clone(), SosWitness::from_terms(sos.size(), sos.nvars(), terms).unwrap()).unwrap();
    }
    (out.expand() != w.expand()).then_some(out)
}

/// Mutations of a matrix certificate, drawn until `count` change an expansion.
pub fn matrix_mutations(c: &MatrixCertificate, count: usize, rng: &mut ChaCha8Rng) -> Vec<MatrixCertificate> {
    let mut out = Vec::new();
    while out.len() < count {
        let mut m = c.clone();
        let changed = if rng.gen_bool(0.3) {
            mutate_witness(&c.t, rng).map(|t| m.t = t)
        } else {
            mutate_witness(&c.v, rng).map(|v| m.v = v)
        };
        if changed.is_some() {
            out.push(m);
        }
    }
    out
}

pub fn scalar_mutations(c: &ScalarCertificate, count: usize, rng: &mut ChaCha8Rng) -> Vec<ScalarCertificate> {
    let mut out = Vec::new();
    while out.len() < count {
        let mut m = c.clone();
        let changed = if rng.gen_bool(0.5) {
            mutate_witness(&c.t, rng).map(|t| m.t = t)
        } else {
            mutate_witness(&c.u, rng).map(|u| m.u = u)
        };
        if changed.is_some() {
            out.push(m);
        }
    }
    out
}

/// Mutations of an eps certificate; every fifth one changes `eps` instead.
pub fn eps_mutations(c: &EpsCertificate, count: usize, rng: &mut ChaCha8Rng) -> Vec<EpsCertificate> {
    let mut out = Vec::new();
    while out.len() < count {
        let mut m = c.clone();
        if out.len() % 5 == 4 {
            m.eps = &c.eps + rat(1, rng.gen_range(2..=64));
            out.push(m);
        } else if let Some(w) = mutate_witness(&c.witness, rng) {
            m.witness = w;
            out.push(m);
        }
    }
    out
}

/// One line of an acceptance report.
pub fn report(name: &str, ok: bool, detail: &str) -> bool {
    println!("[{}] {}: {}", if ok { "PASS" } else { "FAIL" }, name, detail);
    ok
}
