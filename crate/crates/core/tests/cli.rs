use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_psatz")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn certify_then_verify() {
    let dir = tempfile::tempdir().unwrap();
    let prob = write(dir.path(), "w.txt", "vars 1 x;\ntarget matrix [[2, x], [x, 1 + x^2]];\n");
    let cert = dir.path().join("w.cert").to_string_lossy().into_owned();
    let o = run(&["certify", &prob, "--out", &cert]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).contains("multiplier 8*x^4 + 40*x^2 + 48"));
    let text = std::fs::read_to_string(&cert).unwrap();
    assert!(text.contains("term 47 [[1]]"));

    let o = run(&["verify", &prob, "--cert", &cert]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "verified");

    let bad = write(dir.path(), "bad.cert", &text.replacen("term 47 [[1]]", "term 46 [[1]]", 1));
    let o = run(&["verify", &prob, "--cert", &bad]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn eps_of_twice_identity_is_one() {
    let dir = tempfile::tempdir().unwrap();
    let prob = write(dir.path(), "two.txt", "vars 1;\ntarget matrix [[2, 0], [0, 2]];\n");
    let o = run(&["eps-certify", &prob]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("meta eps 1\n"));
}

#[test]
fn negative_target_is_inconclusive() {
    let dir = tempfile::tempdir().unwrap();
    let prob = write(dir.path(), "neg.txt", "vars 1;\ntarget poly -1 - x1^2;\n");
    assert_eq!(run(&["scalar-certify", &prob]).status.code(), Some(2));
}

#[test]
fn input_errors_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let ns = write(dir.path(), "ns.txt", "vars 1;\ntarget matrix [[1, x1], [0, 1]];\n");
    let o = run(&["certify", &ns]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("not symmetric"));
    let missing = dir.path().join("missing.txt").to_string_lossy().into_owned();
    assert_eq!(run(&["certify", &missing]).status.code(), Some(3));
    let garbage = write(dir.path(), "g.txt", "vars 1;\ntarget poly 1 + ;\n");
    assert_eq!(run(&["scalar-certify", &garbage]).status.code(), Some(3));
}

#[test]
fn lemma_bound_prints_constant() {
    let dir = tempfile::tempdir().unwrap();
    let prob = write(dir.path(), "b.txt", "vars 1;\ntarget matrix [[x1, 1]];\n");
    let o = run(&["lemma-bound", &prob]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.lines().any(|l| l.starts_with("k ")));
    assert!(out.lines().any(|l| l.starts_with("l ")));
}

#[test]
fn eval_reports_membership() {
    let dir = tempfile::tempdir().unwrap();
    let prob = write(dir.path(), "ball.txt", "vars 1;\nconstraint 1 - x1^2;\ntarget matrix [[1 + x1^2, x1], [x1, 2]];\n");
    let o = run(&["eval", &prob, "--point", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("in-set false"), "{}", out);
}
