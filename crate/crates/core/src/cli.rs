//! Command-line front end.
//!
//! Exit codes: 0 success or verified, 1 verification failure, 2 inconclusive,
//! 3 input error. Certificates and reports go to stdout (or `--out`),
//! diagnostics to stderr.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::Error;
use crate::format::{CertKind, CertificateFile};
use crate::gram::{matrix_sos_search, Method, Mode, SearchConfig};
use crate::lemma::lemma_bound;
use crate::matpoly::MatPoly;
use crate::parse::{parse_problem, parse_problem_with, ProblemFile, Target};
use crate::poly::{fmt_rational, Poly, RatPoint, Rational};
use crate::scalar::{certify_scalar, ProviderConfig, Strategy};
use crate::schur::{certify_matrix, soundness_sample, MatrixCertificate};
use crate::witness::ConstraintSet;

pub const EXIT_OK: i32 = 0;
pub const EXIT_REJECTED: i32 = 1;
pub const EXIT_INCONCLUSIVE: i32 = 2;
pub const EXIT_INPUT: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "psatz", version, about = "Exact positivity certificates for symmetric matrix polynomials")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Certificate (1 + t) F = I + V for a matrix (or scalar) target.
    Certify(CommonArgs),
    /// Checks a certificate file (--cert) against a problem.
    Verify(CommonArgs),
    /// Certificate (1 + t) f = 1 + u for a scalar target.
    ScalarCertify(CommonArgs),
    /// Bound c I - B^T B = sigma for the matrix target B.
    LemmaBound(CommonArgs),
    /// Largest eps found with F - eps I in the preordering or quadratic module.
    EpsCertify(CommonArgs),
    /// Evaluates target and constraints at --point.
    Eval(CommonArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Preorder,
    Qmodule,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SolverArg {
    Interior,
    Projections,
}

#[derive(Args, Debug)]
struct CommonArgs {
    /// Problem file.
    problem: PathBuf,
    /// Largest SOS-multiplier degree tried by the numeric search.
    #[arg(long, default_value_t = 8)]
    degree_bound: u32,
    #[arg(long, default_value = "auto")]
    strategy: String,
    /// Certificate to verify, or scalar certificate for the file strategy.
    #[arg(long)]
    cert: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print the assembly log to stderr.
    #[arg(long)]
    trace: bool,
    /// Solver convergence tolerance.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long, default_value_t = 20_000)]
    max_iters: usize,
    #[arg(long, value_enum, default_value_t = SolverArg::Interior)]
    solver: SolverArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Points of K_S sampled to check min eig F(x) >= 1 / (1 + t(x)).
    #[arg(long, default_value_t = 0)]
    sample_points: usize,
    /// Sampling box for every coordinate.
    #[arg(long = "box", num_args = 2, value_names = ["LO", "HI"], allow_negative_numbers = true, default_values_t = [-1.0, 1.0])]
    bounds: Vec<f64>,
    #[arg(long, value_enum, default_value_t = ModeArg::Preorder)]
    mode: ModeArg,
    /// Comma-separated rational coordinates, e.g. `1/2,-3`.
    #[arg(long, allow_hyphen_values = true)]
    point: Option<String>,
}

/// Failure of a subcommand with its exit code.
struct Failure {
    code: i32,
    msg: String,
}

fn input(e: impl std::fmt::Display) -> Failure {
    Failure { code: EXIT_INPUT, msg: e.to_string() }
}

/// Exit code for errors raised while searching.
fn search_failure(e: Error) -> Failure {
    let code = match root(&e) {
        Error::Assembly { .. } | Error::IdentityFailed(_) => EXIT_REJECTED,
        Error::Parse { .. } | Error::Io(_) | Error::ConstraintMismatch | Error::MalformedWitness(_) => EXIT_INPUT,
        _ => EXIT_INCONCLUSIVE,
    };
    Failure { code, msg: e.to_string() }
}

fn root(e: &Error) -> &Error {
    match e {
        Error::Recursion { source, .. } => root(source),
        e => e,
    }
}

type Out = Result<(String, i32), Failure>;

/// Runs the command line `argv` (including the program name) and returns the
/// exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    let (args, result) = match &cli.command {
        Command::Certify(a) => (a, certify(a)),
        Command::Verify(a) => (a, verify(a)),
        Command::ScalarCertify(a) => (a, scalar_certify(a)),
        Command::LemmaBound(a) => (a, bound(a)),
        Command::EpsCertify(a) => (a, eps_certify(a)),
        Command::Eval(a) => (a, eval(a)),
    };
    match result {
        Ok((text, code)) => match emit(args.out.as_deref(), &text) {
            Ok(()) => code,
            Err(f) => {
                eprintln!("error: {}", f.msg);
                f.code
            }
        },
        Err(f) => {
            eprintln!("error: {}", f.msg);
            f.code
        }
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| input(format!("{}: {}", p.display(), e))),
        None => {
            print!("{}", text);
            Ok(())
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| input(format!("{}: {}", path.display(), e)))
}

fn load(a: &CommonArgs) -> Result<(ProblemFile, Arc<ConstraintSet>), Failure> {
    let p = parse_problem(&read(&a.problem)?).map_err(input)?;
    let cs = Arc::new(p.constraint_set().map_err(input)?);
    Ok((p, cs))
}

fn provider(a: &CommonArgs) -> Result<ProviderConfig, Failure> {
    if !(a.tol > 0.0 && a.tol.is_finite()) {
        return Err(input(format!("--tol must be positive, got {}", a.tol)));
    }
    let strategy = Strategy::from_str(&a.strategy).map_err(input)?;
    if strategy == Strategy::File && a.cert.is_none() {
        return Err(input("--strategy file needs --cert"));
    }
    let mut search = SearchConfig { degree_cap: a.degree_bound, ..Default::default() };
    search.solver.tol = a.tol;
    search.solver.max_iters = a.max_iters;
    search.solver.method = match a.solver {
        SolverArg::Interior => Method::InteriorPoint,
        SolverArg::Projections => Method::AlternatingProjections,
    };
    Ok(ProviderConfig { strategy, cert_path: a.cert.clone(), search })
}

fn scalar_target(p: &ProblemFile) -> Result<Poly, Failure> {
    match &p.target {
        Target::Poly(f) => Ok(f.clone()),
        Target::Matrix(m) if m.rows() == 1 && m.cols() == 1 => Ok(m.get(0, 0).clone()),
        Target::Matrix(m) => Err(input(format!("expected a scalar target, found a {}x{} matrix", m.rows(), m.cols()))),
    }
}

/// Runs the soundness sampler if requested; returns the report line and
/// whether it passed.
fn sample(a: &CommonArgs, f: &MatPoly, cert: &MatrixCertificate, cs: &ConstraintSet) -> Result<Option<bool>, Failure> {
    if a.sample_points == 0 {
        return Ok(None);
    }
    let (lo, hi) = (a.bounds[0], a.bounds[1]);
    if !(lo < hi) {
        return Err(input(format!("--box needs LO < HI, got {} {}", lo, hi)));
    }
    eprintln!("seed {}", a.seed);
    let report = soundness_sample(f, cert, cs, a.sample_points, (lo, hi), 1e-6, a.seed).map_err(input)?;
    eprintln!("sampling: {}", report);
    for (x, eig, bound) in &report.failures {
        eprintln!("  at {:?}: min eigenvalue {:e} below {:e}", x, eig, bound);
    }
    Ok(Some(report.passed()))
}

fn certify(a: &CommonArgs) -> Out {
    let (p, cs) = load(a)?;
    let cfg = provider(a)?;
    let f = p.target_matrix();
    let cert = certify_matrix(&f, &cs, &cfg).map_err(search_failure)?;
    if a.trace {
        for step in &cert.trace {
            eprintln!("{}", step);
        }
    }
    eprintln!("multiplier {}", cert.multiplier().display_with(&p.names));
    let code = match sample(a, &f, &cert, &cs)? {
        Some(false) => EXIT_REJECTED,
        _ => EXIT_OK,
    };
    Ok((CertificateFile::from_matrix(&cert, Some(&p.names)).to_string(), code))
}

fn scalar_certify(a: &CommonArgs) -> Out {
    let (p, cs) = load(a)?;
    let cfg = provider(a)?;
    let f = scalar_target(&p)?;
    let cert = certify_scalar(&f, &cs, &cfg).map_err(search_failure)?;
    Ok((CertificateFile::from_scalar(&cert, Some(&p.names)).to_string(), EXIT_OK))
}

fn eps_certify(a: &CommonArgs) -> Out {
    let (p, cs) = load(a)?;
    let cfg = provider(a)?;
    let mode = match a.mode {
        ModeArg::Preorder => Mode::Preorder,
        ModeArg::Qmodule => Mode::QModule,
    };
    let cert = matrix_sos_search(&p.target_matrix(), cs, mode, &cfg.search).map_err(search_failure)?;
    eprintln!("eps {} at degree {}", fmt_rational(&cert.eps), cert.degree);
    Ok((CertificateFile::from_eps(&cert, Some(&p.names)).to_string(), EXIT_OK))
}

fn verify(a: &CommonArgs) -> Out {
    let (p, cs) = load(a)?;
    let path = a.cert.as_ref().ok_or_else(|| input("verify needs --cert"))?;
    let file = CertificateFile::parse(&read(path)?).map_err(input)?;
    if file.nvars() != p.nvars() {
        return Err(input(format!("certificate has {} variables, problem has {}", file.nvars(), p.nvars())));
    }
    let f = p.target_matrix();
    let ok = file.verify_against(&f, &cs).map_err(input)?;
    let sampled = match file.kind {
        CertKind::MatrixKrivine if ok => sample(a, &f, &file.into_matrix(&cs).map_err(input)?, &cs)?,
        _ => None,
    };
    if !ok {
        return Ok(("rejected\n".into(), EXIT_REJECTED));
    }
    if sampled == Some(false) {
        return Ok(("rejected: sampling\n".into(), EXIT_REJECTED));
    }
    Ok(("verified\n".into(), EXIT_OK))
}

fn bound(a: &CommonArgs) -> Out {
    let p = parse_problem_with(&read(&a.problem)?, false).map_err(input)?;
    let b = p.target_matrix();
    let w = lemma_bound(&b).map_err(search_failure)?;
    if !w.verify() {
        return Ok(("rejected\n".into(), EXIT_REJECTED));
    }
    let mut out = String::new();
    let _ = writeln!(out, "k {}", fmt_rational(&w.k));
    let _ = writeln!(out, "l {}", w.l);
    let _ = writeln!(out, "c {}", w.c().display_with(&p.names));
    for t in w.sos.terms() {
        let _ = writeln!(out, "term {} {}", fmt_rational(&t.weight), t.factor.display_with(&p.names));
    }
    Ok((out, EXIT_OK))
}

fn parse_point(text: &str, d: usize) -> Result<RatPoint, Failure> {
    let coords = text
        .split(',')
        .map(|s| Rational::from_str(s.trim()).map_err(|_| input(format!("bad coordinate '{}'", s.trim()))))
        .collect::<Result<Vec<_>, _>>()?;
    if coords.len() != d {
        return Err(input(format!("--point has {} coordinates, expected {}", coords.len(), d)));
    }
    Ok(RatPoint::new(coords))
}

fn eval(a: &CommonArgs) -> Out {
    let p = parse_problem_with(&read(&a.problem)?, false).map_err(input)?;
    let text = a.point.as_deref().ok_or_else(|| input("eval needs --point"))?;
    let x = parse_point(text, p.nvars())?;
    let cs = p.constraint_set().map_err(input)?;
    let mut out = String::new();
    for (i, g) in p.constraints.iter().enumerate() {
        let v = g.eval(x.coords()).map_err(input)?;
        let _ = writeln!(out, "g{} {}", i + 1, fmt_rational(&v));
    }
    let _ = writeln!(out, "in-set {}", cs.contains(&x).map_err(input)?);
    let f = p.target_matrix();
    let m = f.eval(&x).map_err(input)?;
    let _ = write!(out, "target [");
    for i in 0..m.rows {
        let row: Vec<String> = (0..m.cols).map(|j| fmt_rational(m.get(i, j))).collect();
        let _ = write!(out, "{}[{}]", if i > 0 { ", " } else { "" }, row.join(", "));
    }
    out.push_str("]\n");
    if f.rows() == f.cols() && f.is_symmetric().unwrap_or(false) {
        let _ = writeln!(out, "psd {}", crate::witness::is_psd_at(&f, &x).map_err(input)?);
    }
    Ok((out, EXIT_OK))
}
