use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_pachner"));
    c.env_remove("PACHNER_WORKERS");
    c
}

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn theorem_passes_and_constant_gauss_fails() {
    let ok = run(&["verify", "theorem", "--group", "Z3"]);
    assert_eq!(ok.status.code(), Some(0), "{}", stdout(&ok));
    assert!(stdout(&ok).contains("verdict=pass"));
    let bad = run(&["verify", "theorem", "--group", "Z3", "--constant-g"]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(stdout(&bad).contains("counterexample.index="));
}

#[test]
fn set_theoretic_relation() {
    let o = run(&["verify", "p33", "--solution", "set", "--samples", "1000", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("compared=1000"));
}

#[test]
fn other_verify_commands() {
    for args in [
        &["verify", "p33", "--solution", "bichar:Z2xZ2"][..],
        &["verify", "p33", "--solution", "triple:groupalg:S3"],
        &["verify", "yb", "--solution", "bichar:Z3"],
        &["verify", "pentagon", "--group", "S3"],
        &["verify", "psym", "--solution", "bichar:Z4"],
        &["verify", "p33", "--solution", "bichar:Z5", "--backend", "float"],
    ] {
        let o = run(args);
        assert_eq!(o.status.code(), Some(0), "{args:?}: {}{}", stdout(&o), stderr(&o));
    }
}

#[test]
fn usage_errors_exit_64() {
    let o = run(&["moves", "apply", "--tri", "missing.tri", "--type", "3,3"]);
    assert_eq!(o.status.code(), Some(64));
    assert!(stderr(&o).contains("missing.tri"));
    assert_eq!(run(&["verify", "p33", "--solution", "set", "--frobnicate"]).status.code(), Some(64));
    assert_eq!(run(&["verify", "p33", "--solution", "bichar:Z1"]).status.code(), Some(64));
    assert_eq!(run(&["verify", "p33", "--solution", "bichar:Z2", "--backend", "fast"]).status.code(), Some(64));
    assert_eq!(run(&["selftest", "--only", "9"]).status.code(), Some(64));
}

#[test]
fn parse_errors_name_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.tri");
    std::fs::write(&p, "dim 4\npent 0 1 2 3 4 +\npent 0 1 2 3 +\n").unwrap();
    let o = run(&["statesum", "--tri", p.to_str().unwrap(), "--solution", "bichar:Z2"]);
    assert_eq!(o.status.code(), Some(64));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
}

#[test]
fn statesum_on_the_sphere() {
    let tri = data("boundary_delta5.tri");
    let o = run(&["statesum", "--tri", tri.to_str().unwrap(), "--solution", "bichar:Z2", "--backend", "exact"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.starts_with("config.command=statesum\n"));
    assert!(out.contains("Z = (16)·r^1\n"), "{out}");
}

#[test]
fn reports_are_reproducible() {
    let tri = data("s4_stellar.tri");
    let args = [
        "moves", "walk", "--tri", tri.to_str().unwrap(), "--type", "3,3", "--count", "8", "--seed", "7", "--solution",
        "bichar:Z2",
    ];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0), "{}", stdout(&a));
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).contains("all_equal=true"));
}

#[test]
fn applied_move_keeps_the_value() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("moved.tri");
    let tri = data("boundary_delta5.tri");
    let o = run(&["moves", "apply", "--tri", tri.to_str().unwrap(), "--type", "3,3", "--site", "0", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let z = |p: &std::path::Path| {
        let o = run(&["statesum", "--tri", p.to_str().unwrap(), "--solution", "bichar:Z3"]);
        stdout(&o).lines().find(|l| l.starts_with("Z = ")).unwrap().to_string()
    };
    assert_eq!(z(&out), z(&tri));
    let sites = run(&["moves", "sites", "--tri", tri.to_str().unwrap(), "--type", "3,3"]);
    assert!(stdout(&sites).lines().any(|l| l.starts_with("sites=")));
}

#[test]
fn selftest_list_and_fault() {
    let o = run(&["selftest", "--list"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 8);
    let f = run(&["selftest", "--inject-fault", "--only", "1,2"]);
    assert_eq!(f.status.code(), Some(1), "{}", stdout(&f));
    let g = run(&["selftest", "--only", "3,5"]);
    assert_eq!(g.status.code(), Some(0), "{}", stdout(&g));
}

#[test]
fn worker_variable() {
    let o = bin()
        .env("PACHNER_WORKERS", "2")
        .args(["verify", "theorem", "--group", "Z2"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("config.workers=2"));
    let bad = bin().env("PACHNER_WORKERS", "zero").args(["verify", "theorem", "--group", "Z2"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(64));
}
