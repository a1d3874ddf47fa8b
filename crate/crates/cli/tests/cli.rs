use std::path::PathBuf;
use std::process::Command;

use growth_bounds::automata::{AutomataReport, TransferMatrix};
use growth_bounds::manifolds::FormulaBound;
use growth_bounds::twig::{BivariatePolynomial, TwigBoundReport};
use growth_bounds_cli::{
    run, EnumerationReport, ManifoldCountReport, ReproduceReport, RowStatus, EXIT_MISMATCH, EXIT_OK, EXIT_USAGE,
};
use serde::de::DeserializeOwned;
use serde::Serialize;

struct Output {
    code: i32,
    out: String,
    err: String,
}

fn cli(args: &[&str]) -> Output {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("growth-bounds").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    Output {
        code,
        out: String::from_utf8(out).unwrap(),
        err: String::from_utf8(err).unwrap(),
    }
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("growth-bounds-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

/// Parse, re-emit and parse again.
fn round_trip<T: Serialize + DeserializeOwned + PartialEq + std::fmt::Debug>(text: &str) -> T {
    let x: T = serde_json::from_str(text).unwrap();
    let again: T = serde_json::from_str(&serde_json::to_string(&x).unwrap()).unwrap();
    assert_eq!(again, x);
    x
}

#[test]
fn random_walk_counts() {
    let o = cli(&["enumerate", "--rule", "rw", "--lattice", "square", "--n", "3"]);
    assert_eq!(o.code, EXIT_OK, "{}", o.err);
    let counts: Vec<&str> = o.out.lines().skip(1).map(|l| l.split(',').nth(1).unwrap()).collect();
    assert_eq!(counts, ["4", "16", "64"]);
    assert!(o.out.starts_with("n,c_n,mu_upper\n1,4,4.00000\n"));
}

#[test]
fn usage_errors_exit_1() {
    for args in [
        vec![],
        vec!["frobnicate"],
        vec!["enumerate", "--rule", "saw", "--lattice", "square"],
        vec!["enumerate", "--rule", "saw", "--lattice", "square", "--n", "3", "--bogus"],
        vec!["enumerate", "--rule", "nope", "--lattice", "square", "--n", "3"],
        vec!["enumerate", "--rule", "lwalk", "--lattice", "triangular", "--n", "3"],
        vec!["reproduce", "--table", "7"],
        vec!["twig-bound", "--d", "2", "--level", "0"],
        vec!["formula-bound", "--theorem", "2", "--d", "3", "--k", "3"],
        vec!["manifold-count", "--class", "sam", "--d", "2", "--k", "3", "--n", "2"],
    ] {
        let o = cli(&args);
        assert_eq!(o.code, EXIT_USAGE, "{args:?}");
        assert!(!o.err.is_empty(), "{args:?}");
        assert!(o.out.is_empty(), "{args:?}");
    }
}

#[test]
fn size_caps_are_named() {
    let o = cli(&["enumerate", "--rule", "saw", "--lattice", "square", "--n", "30"]);
    assert_eq!(o.code, EXIT_USAGE);
    assert!(o.err.contains("22"), "{}", o.err);
    let o = cli(&["manifold-count", "--class", "xd", "--d", "3", "--k", "2", "--n", "12"]);
    assert_eq!(o.code, EXIT_USAGE);
    assert!(o.err.contains('8'), "{}", o.err);
    let o = cli(&["enumerate", "--rule", "saw", "--lattice", "square", "--n", "5", "--cap", "4"]);
    assert_eq!(o.code, EXIT_USAGE);
    assert!(o.err.contains('4'), "{}", o.err);
    let o = cli(&["enumerate", "--rule", "saw", "--lattice", "square", "--n", "5", "--cap", "5"]);
    assert_eq!(o.code, EXIT_OK, "{}", o.err);
}

#[test]
fn help_and_version_exit_0() {
    for flag in ["--help", "--version"] {
        let o = cli(&[flag]);
        assert_eq!(o.code, EXIT_OK);
        assert!(!o.out.is_empty());
    }
}

#[test]
fn formula_bound_output() {
    let o = cli(&["formula-bound", "--theorem", "3", "--d", "4", "--k", "3"]);
    assert_eq!(o.code, EXIT_OK);
    let b: FormulaBound = round_trip(&o.out);
    assert_eq!(b.exact.as_deref(), Some("9375/256"));
    assert_eq!(b.decimal, 36.62109);
    let v: serde_json::Value = serde_json::from_str(&o.out).unwrap();
    assert_eq!(v["exact"], "9375/256");
    assert_eq!(v["decimal"], 36.62109);
}

#[test]
fn reports_round_trip() {
    let o = cli(&["enumerate", "--rule", "sow", "--lattice", "square", "--n", "6", "--format", "json"]);
    let e: EnumerationReport = round_trip(&o.out);
    assert_eq!(e.counts.last().unwrap(), "860");

    let matrix = scratch("saw4.json");
    let o = cli(&[
        "automata-bound",
        "--rule",
        "saw",
        "--lattice",
        "square",
        "--k",
        "4",
        "--emit-matrix",
        matrix.to_str().unwrap(),
    ]);
    assert_eq!(o.code, EXIT_OK, "{}", o.err);
    let a: AutomataReport = round_trip(&o.out);
    assert_eq!(a.dim, 3);
    let m: TransferMatrix = round_trip(&std::fs::read_to_string(&matrix).unwrap());
    assert_eq!(m.dim, 3);

    let poly = scratch("twig.json");
    let o = cli(&["twig-bound", "--d", "2", "--level", "2", "--emit-poly", poly.to_str().unwrap()]);
    let t: TwigBoundReport = round_trip(&o.out);
    assert_eq!(t.per_level.len(), 2);
    let _: BivariatePolynomial = round_trip(&std::fs::read_to_string(&poly).unwrap());

    let o = cli(&["manifold-count", "--class", "som", "--d", "3", "--k", "2", "--n", "4"]);
    let c: ManifoldCountReport = round_trip(&o.out);
    assert_eq!(c.counts, [3, 18, 146, 1380]);

    let o = cli(&["reproduce", "--table", "4", "--max", "6", "--format", "json"]);
    let r: ReproduceReport = round_trip(&o.out);
    assert_eq!(r.rows.len(), 3);
    assert!(r.rows.iter().all(|r| r.status == RowStatus::Match));
}

#[test]
fn reproduce_is_byte_stable() {
    for args in [
        ["reproduce", "--table", "1", "--max", "12"],
        ["reproduce", "--table", "3", "--max", "8"],
        ["reproduce", "--table", "5", "--max", "1"],
    ] {
        let a = cli(&args);
        let b = cli(&args);
        assert_eq!(a.code, EXIT_OK, "{args:?}: {}", a.err);
        assert_eq!(a.out, b.out);
        assert_eq!(a.err, b.err);
    }
}

#[test]
fn reproduce_flags_the_duplicate_row() {
    let o = cli(&["reproduce", "--table", "3", "--max", "8"]);
    assert_eq!(o.code, EXIT_OK);
    assert!(o.out.contains("\n7,4.58796,4.55209,flagged\n"), "{}", o.out);
    assert!(o.err.contains("flag: table 3 row 7"));
}

#[test]
fn golden_mismatch_exits_2() {
    let golden = scratch("bad_table2.csv");
    std::fs::write(&golden, "k,bound\n5,2.86055\n7,2.81000\n").unwrap();
    let o = cli(&["reproduce", "--table", "2", "--golden", golden.to_str().unwrap()]);
    assert_eq!(o.code, EXIT_MISMATCH, "{}", o.err);
    assert!(o.out.contains("7,2.82042,2.81000,mismatch"), "{}", o.out);

    let counts = scratch("bad_table1.csv");
    std::fs::write(&counts, "n,c_n,mu_upper\n1,4,4.00000\n2,13,3.46411\n").unwrap();
    let o = cli(&["reproduce", "--table", "1", "--golden", counts.to_str().unwrap()]);
    assert_eq!(o.code, EXIT_MISMATCH);

    std::fs::write(&counts, "n,c_n\n1,4\n").unwrap();
    let o = cli(&["reproduce", "--table", "1", "--golden", counts.to_str().unwrap()]);
    assert_eq!(o.code, EXIT_USAGE);
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_growth-bounds");
    let status = |args: &[&str]| Command::new(bin).args(args).output().unwrap();
    let ok = status(&["formula-bound", "--theorem", "5", "--d", "3", "--k", "2", "--threads", "1"]);
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&ok.stdout).trim(), r#"{"formula_id":"sam_lower","d":3,"k":2,"exact":"4/1","decimal":4.0}"#);
    assert_eq!(status(&["nonsense"]).status.code(), Some(1));
    let env = Command::new(bin)
        .env("GROWTH_BOUNDS_THREADS", "1")
        .args(["enumerate", "--rule", "saw", "--lattice", "triangular", "--n", "4"])
        .output()
        .unwrap();
    assert_eq!(env.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&env.stdout).contains("4,618,"));
}
