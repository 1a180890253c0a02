use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn symred(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_symred"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

fn scratch(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("symred-cli-{}-{name}", std::process::id()))
}

#[test]
fn catalog_verify_prints_one_line_per_entry() {
    let o = symred(&["catalog", "verify"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 13);
    assert!(lines.iter().all(|l| l.contains(" PASS ")), "{out}");
}

#[test]
fn catalog_verify_single_entry_with_parameters() {
    let o = symred(&[
        "catalog",
        "verify",
        "--entry",
        "H_power_n",
        "--params",
        "n=3, gamma=1/2",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().count(), 1);
}

#[test]
fn reduce_case_a_json() {
    let o = symred(&["reduce", "--case", "A", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["case"], "A");
    assert_eq!(v["m"], 1);
    assert_eq!(v["matches_catalog"], true);
    assert_eq!(v["odes"]["phi2'"], "-2*a1*phi2 + 4*a2*phi2");
    assert_eq!(v["odes"]["phi0'"], "-2*a1*phi0 + 2*a2*phi0");
}

#[test]
fn case_a_solution_is_strictly_non_invariant() {
    let o = symred(&[
        "invariance",
        "--case",
        "A",
        "--family",
        "tanh-general",
        "--samples",
        "50",
        "--seed",
        "7",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("verdict strictly-non-invariant"));
}

#[test]
fn case_b_invariant_subcase_and_expectations() {
    let args = [
        "invariance",
        "--case",
        "B",
        "--family",
        "poly-exp",
        "--params",
        "a4=0, a5=0",
    ];
    let o = symred(&[&args[..], &["--expect", "invariant", "--format", "json"]].concat());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(json(&o)["verdict"], "invariant-along");
    let o = symred(&[&args[..], &["--expect", "non-invariant"]].concat());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("ERROR verification-failed:"));
}

#[test]
fn generators_must_be_admitted() {
    let o = symred(&[
        "invariance",
        "--case",
        "A",
        "--family",
        "tanh-cubic",
        "--generators",
        "X1,X3",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(
        stderr(&o).starts_with("ERROR not-admitted:"),
        "{}",
        stderr(&o)
    );
}

#[test]
fn output_is_deterministic() {
    for args in [
        &[
            "invariance",
            "--case",
            "C",
            "--family",
            "exp-decay",
            "--seed",
            "3",
            "--format",
            "json",
        ][..],
        &[
            "solve",
            "--case",
            "A",
            "--family",
            "tanh-general",
            "--rk45",
            "--format",
            "csv",
        ][..],
        &[
            "residual", "--case", "D", "--family", "erf", "--format", "csv",
        ][..],
    ] {
        let a = symred(args);
        let b = symred(args);
        assert_eq!(a.status.code(), Some(0), "{args:?}: {}", stderr(&a));
        assert!(!a.stdout.is_empty());
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn help_documents_defaults() {
    let o = symred(&["solve", "--help"]);
    assert_eq!(o.status.code(), Some(0));
    let h = stdout(&o);
    assert!(
        h.contains("1e-10") && h.contains("1e-12") && h.contains("[default: 11]"),
        "{h}"
    );
    let h = stdout(&symred(&["mol", "--help"]));
    assert!(
        h.contains("1e-8") && h.contains("1e-10") && h.contains("201 points"),
        "{h}"
    );
    let h = stdout(&symred(&["invariance", "--help"]));
    assert!(h.contains("[default: 50]") && h.contains("1e-8"), "{h}");
    assert_eq!(symred(&["--help"]).status.code(), Some(0));
}

#[test]
fn usage_and_input_errors_exit_2() {
    for (args, code) in [
        (&["frobnicate"][..], "usage"),
        (&["reduce"][..], "usage"),
        (&["reduce", "--case", "Q"][..], "unknown-id"),
        (
            &[
                "pde",
                "classify-verify",
                "--case",
                "A",
                "--params",
                "a1=1.5",
            ][..],
            "inexact-parameter",
        ),
        (&["residual", "--case", "B", "--family", "erf"][..], "usage"),
        (
            &[
                "solve",
                "--case",
                "A",
                "--family",
                "tanh-resonant",
                "--params",
                "a1=1",
            ][..],
            "parameter-conflict",
        ),
        (&["catalog", "verify", "--params", "n=("][..], "parse-error"),
        (
            &[
                "symmetry",
                "check",
                "--file",
                "/nonexistent/u.txt",
                "--operator",
                "u1",
            ][..],
            "io",
        ),
    ] {
        let o = symred(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
        assert!(
            stderr(&o).starts_with(&format!("ERROR {code}:")),
            "{args:?}: {}",
            stderr(&o)
        );
    }
}

#[test]
fn failed_verifications_exit_1() {
    let u = scratch("u.txt");
    fs::write(&u, "# a sample equation\nu3 = -3*u2*u1/u\n").unwrap();
    let path = u.to_str().unwrap();
    let o = symred(&["symmetry", "check", "--file", path, "--operator", "u1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = symred(&["symmetry", "check", "--file", path, "--operator", "u^2"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL"));
    fs::remove_file(u).ok();

    let o = symred(&[
        "mol",
        "--case",
        "A",
        "--family",
        "tanh-general",
        "--grid",
        "1,2,41",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("ERROR ill-posed:"));
}

#[test]
fn classification_reports_conflicts_as_not_applicable() {
    let o = symred(&[
        "pde",
        "classify-verify",
        "--case",
        "A",
        "--params",
        "a4=1",
        "--format",
        "json",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v = json(&o);
    let status: Vec<&str> = v["generators"]
        .as_array()
        .unwrap()
        .iter()
        .map(|g| g["status"].as_str().unwrap())
        .collect();
    assert_eq!(status, ["checked", "checked", "n/a", "n/a"]);
    let o = symred(&["pde", "classify-verify", "--case", "A"]);
    assert!(stdout(&o).contains("as listed FAIL, corrected xi = -a2*t*x: PASS"));
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let cfg = scratch("run.cfg");
    fs::write(&cfg, "# batch\ncase = A\nfamily = tanh-resonant\nparams = kappa=-1\ngrid = 1,2,41\nformat = json\n").unwrap();
    let out = scratch("mol.json");
    let c = cfg.to_str().unwrap();
    let o = symred(&["mol", "--config", c, "--output", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["grid"]["nx"], 41);
    assert!(v["relative_error"].as_f64().unwrap() <= 1e-3);

    let o = symred(&["mol", "--config", c, "--grid", "1,2,33", "--format", "text"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("with 33 points"));
    fs::remove_file(cfg).ok();
    fs::remove_file(out).ok();
}

#[test]
fn solve_writes_csv_file() {
    let path = scratch("traj.csv");
    let o = symred(&[
        "solve",
        "--case",
        "C",
        "--family",
        "incomplete-gamma",
        "--rk45",
        "--points",
        "4",
        "--csv",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(&path).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next(),
        Some("t,phi0,phi1,phi2,rk45_phi0,rk45_phi1,rk45_phi2")
    );
    assert_eq!(lines.count(), 4);
    fs::remove_file(path).ok();
}

#[test]
fn residual_exact_mode_passes() {
    let o = symred(&[
        "residual",
        "--case",
        "B",
        "--family",
        "poly-cubic",
        "--exact",
        "--format",
        "json",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v = json(&o);
    assert_eq!(v["mode"], "exact");
    assert!(v["max_abs_residual"].as_f64().unwrap() <= 1e-9);
}
