//! Python bindings: polynomial parsing and arithmetic, certificate search and
//! exact verification. Problems and certificates cross the boundary as text
//! in the same formats the command line uses.

use std::sync::Arc;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use psatz::format::CertificateFile;
use psatz::gram::{matrix_sos_search, Mode, SearchConfig};
use psatz::parse::{parse_matrix, parse_poly, parse_problem, parse_problem_with, ProblemFile};
use psatz::poly::{default_names, fmt_rational, RatPoint, Rational};
use psatz::scalar::{certify_scalar, ProviderConfig, Strategy};
use psatz::schur::certify_matrix;
use psatz::witness::ConstraintSet;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn search_err(e: impl std::fmt::Display) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

fn rationals(coords: Vec<String>) -> PyResult<Vec<Rational>> {
    coords.iter().map(|s| s.trim().parse::<Rational>().map_err(|_| value_err(format!("bad rational '{}'", s)))).collect()
}

/// Exact multivariate polynomial over the rationals.
#[pyclass(name = "Poly", frozen)]
struct PyPoly(psatz::Poly);

#[pymethods]
impl PyPoly {
    /// Parses `text` over the variables `x1..x{nvars}`.
    #[new]
    fn new(text: &str, nvars: usize) -> PyResult<Self> {
        parse_poly(text, &default_names(nvars)).map(PyPoly).map_err(value_err)
    }

    #[getter]
    fn nvars(&self) -> usize {
        self.0.nvars()
    }

    fn degree(&self) -> Option<u32> {
        self.0.degree()
    }

    /// Exact value at a point given as rational strings such as `"1/2"`.
    fn eval(&self, point: Vec<String>) -> PyResult<String> {
        let v = self.0.eval(&rationals(point)?).map_err(value_err)?;
        Ok(fmt_rational(&v))
    }

    fn __add__(&self, other: &PyPoly) -> PyResult<PyPoly> {
        self.0.try_add(&other.0).map(PyPoly).map_err(value_err)
    }

    fn __sub__(&self, other: &PyPoly) -> PyResult<PyPoly> {
        self.0.try_sub(&other.0).map(PyPoly).map_err(value_err)
    }

    fn __mul__(&self, other: &PyPoly) -> PyResult<PyPoly> {
        self.0.try_mul(&other.0).map(PyPoly).map_err(value_err)
    }

    fn __pow__(&self, e: u32, _modulo: Option<u32>) -> PyPoly {
        PyPoly(self.0.pow(e))
    }

    fn __eq__(&self, other: &PyPoly) -> bool {
        self.0 == other.0
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Poly('{}', {})", self.0, self.0.nvars())
    }
}

/// Matrix of polynomials.
#[pyclass(name = "MatPoly", frozen)]
struct PyMatPoly(psatz::MatPoly);

#[pymethods]
impl PyMatPoly {
    /// Parses `[[a, b], [c, d]]` over `x1..x{nvars}`.
    #[new]
    fn new(text: &str, nvars: usize) -> PyResult<Self> {
        parse_matrix(text, &default_names(nvars)).map(PyMatPoly).map_err(value_err)
    }

    #[getter]
    fn shape(&self) -> (usize, usize) {
        self.0.shape()
    }

    fn is_symmetric(&self) -> PyResult<bool> {
        self.0.is_symmetric().map_err(value_err)
    }

    fn entry(&self, i: usize, j: usize) -> PyResult<PyPoly> {
        let (r, c) = self.0.shape();
        if i >= r || j >= c {
            return Err(value_err(format!("entry ({}, {}) outside {}x{}", i, j, r, c)));
        }
        Ok(PyPoly(self.0.get(i, j).clone()))
    }

    /// Exact value at a point, as nested lists of rational strings.
    fn eval(&self, point: Vec<String>) -> PyResult<Vec<Vec<String>>> {
        let m = self.0.eval(&RatPoint::new(rationals(point)?)).map_err(value_err)?;
        Ok((0..m.rows).map(|i| (0..m.cols).map(|j| fmt_rational(m.get(i, j))).collect()).collect())
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }
}

/// A serialized certificate together with its kind.
#[pyclass(name = "Certificate", frozen)]
struct PyCertificate {
    file: CertificateFile,
}

#[pymethods]
impl PyCertificate {
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        CertificateFile::parse(text).map(|file| PyCertificate { file }).map_err(value_err)
    }

    #[getter]
    fn kind(&self) -> &'static str {
        self.file.kind.as_str()
    }

    /// `eps` for the eps kinds, `None` otherwise.
    #[getter]
    fn eps(&self) -> Option<String> {
        self.file.meta.get("eps").cloned()
    }

    /// `1 + t` for the Krivine kinds, `None` otherwise.
    fn multiplier(&self) -> Option<String> {
        let (_, t) = self.file.witnesses.iter().find(|(n, _)| n == "t")?;
        let p = psatz::Poly::one(t.nvars()) + t.expand().get(0, 0).clone();
        Some(p.display_with(&self.file.names).to_string())
    }

    /// Exact check against a problem file.
    fn verify(&self, problem: &str) -> PyResult<bool> {
        let (p, cs) = load(problem)?;
        self.file.verify_against(&p.target_matrix(), &cs).map_err(value_err)
    }

    fn text(&self) -> String {
        self.file.to_string()
    }

    fn __str__(&self) -> String {
        self.file.to_string()
    }
}

fn load(problem: &str) -> PyResult<(ProblemFile, Arc<ConstraintSet>)> {
    let p = parse_problem(problem).map_err(value_err)?;
    let cs = Arc::new(p.constraint_set().map_err(value_err)?);
    Ok((p, cs))
}

fn provider(strategy: &str, degree_bound: u32) -> PyResult<ProviderConfig> {
    let strategy: Strategy = strategy.parse().map_err(value_err)?;
    if strategy == Strategy::File {
        return Err(value_err("the file strategy is only available from the command line"));
    }
    Ok(ProviderConfig { strategy, cert_path: None, search: SearchConfig { degree_cap: degree_bound, ..Default::default() } })
}

/// Certificate `(1 + t) F = I + V` for the problem's target.
#[pyfunction]
#[pyo3(signature = (problem, strategy = "auto", degree_bound = 8))]
fn certify(problem: &str, strategy: &str, degree_bound: u32) -> PyResult<PyCertificate> {
    let (p, cs) = load(problem)?;
    let cfg = provider(strategy, degree_bound)?;
    let cert = certify_matrix(&p.target_matrix(), &cs, &cfg).map_err(search_err)?;
    Ok(PyCertificate { file: CertificateFile::from_matrix(&cert, Some(&p.names)) })
}

/// Certificate `(1 + t) f = 1 + u` for a scalar target.
#[pyfunction]
#[pyo3(signature = (problem, strategy = "auto", degree_bound = 8))]
fn scalar_certify(problem: &str, strategy: &str, degree_bound: u32) -> PyResult<PyCertificate> {
    let (p, cs) = load(problem)?;
    let f = p.target_matrix();
    if f.shape() != (1, 1) {
        return Err(value_err("expected a scalar target"));
    }
    let cert = certify_scalar(f.get(0, 0), &cs, &provider(strategy, degree_bound)?).map_err(search_err)?;
    Ok(PyCertificate { file: CertificateFile::from_scalar(&cert, Some(&p.names)) })
}

/// Certificate `F - eps I` in the preordering (`mode="preorder"`) or the
/// quadratic module (`mode="qmodule"`).
#[pyfunction]
#[pyo3(signature = (problem, mode = "preorder", degree_bound = 8))]
fn eps_certify(problem: &str, mode: &str, degree_bound: u32) -> PyResult<PyCertificate> {
    let (p, cs) = load(problem)?;
    let mode = match mode {
        "preorder" => Mode::Preorder,
        "qmodule" => Mode::QModule,
        m => return Err(value_err(format!("unknown mode '{}'", m))),
    };
    let cfg = SearchConfig { degree_cap: degree_bound, ..Default::default() };
    let cert = matrix_sos_search(&p.target_matrix(), cs, mode, &cfg).map_err(search_err)?;
    Ok(PyCertificate { file: CertificateFile::from_eps(&cert, Some(&p.names)) })
}

/// `(k, l, c)` with `c I - B^T B` a sum of squares and `c = k p^l`, for the
/// (possibly rectangular) matrix target of `problem`.
#[pyfunction]
fn lemma_bound(problem: &str) -> PyResult<(String, u32, String)> {
    let p = parse_problem_with(problem, false).map_err(value_err)?;
    let w = psatz::lemma::lemma_bound(&p.target_matrix()).map_err(search_err)?;
    if !w.verify() {
        return Err(search_err("bound identity failed"));
    }
    Ok((fmt_rational(&w.k), w.l, w.c().display_with(&p.names).to_string()))
}

/// Exact verification of certificate text against problem text.
#[pyfunction]
fn verify(problem: &str, certificate: &str) -> PyResult<bool> {
    PyCertificate::parse(certificate)?.verify(problem)
}

#[pymodule]
fn pypsatz(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPoly>()?;
    m.add_class::<PyMatPoly>()?;
    m.add_class::<PyCertificate>()?;
    m.add_function(wrap_pyfunction!(certify, m)?)?;
    m.add_function(wrap_pyfunction!(scalar_certify, m)?)?;
    m.add_function(wrap_pyfunction!(eps_certify, m)?)?;
    m.add_function(wrap_pyfunction!(lemma_bound, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
