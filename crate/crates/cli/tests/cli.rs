use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const EXAMPLE_ONE: &str = r#"{"alpha": 1.5, "lambda": 2, "eta": 0.3333333333333333, "f": "t + exp(-x)"}"#;
const EXAMPLE_TWO: &str = r#"{"alpha": 1.5, "lambda": 1.6, "eta": 0.5,
  "f": "t + (4/5)*x*exp(2*x)/(exp(2*x)+exp(x)-999/500)",
  "limits": {"f0": 400, "f_supinf": 0.8}}"#;

fn cfbvp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cfbvp")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// `name = value` lines parsed as numbers.
fn printed_value(out: &str, name: &str) -> f64 {
    let line = out.lines().find(|l| l.starts_with(name)).unwrap_or_else(|| panic!("no {name} in {out}"));
    line.split(" = ").nth(1).unwrap().parse().unwrap()
}

#[test]
fn kernel_eval_prints_the_three_kernels() {
    let o = cfbvp(&["kernel", "eval", "--alpha", "2", "--lambda", "0", "--eta", "1", "--t", "0.25", "--s", "0.5"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert_eq!(printed_value(&out, "G(t,s)"), 0.125);
    assert_eq!(printed_value(&out, "K(t,s)"), 0.125);

    let o = cfbvp(&["kernel", "eval", "--alpha", "2", "--lambda", "1.6", "--eta", "0.5", "--t", "0.5", "--s", "0.25"]);
    assert_eq!(printed_value(&stdout(&o), "K(t,s)"), 0.1875);
}

#[test]
fn kernel_eval_rejects_degenerate_coupling() {
    let o = cfbvp(&["kernel", "eval", "--alpha", "1.5", "--lambda", "8", "--eta", "0.6", "--t", "0.5", "--s", "0.5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("lambda*eta^2 must be < 2"), "{}", stderr(&o));
}

#[test]
fn kernel_verify_finds_no_violations_and_is_reproducible() {
    let args =
        ["kernel", "verify", "--alpha", "1.3", "--lambda", "3", "--eta", "0.7", "--samples", "20000", "--seed", "9"];
    let a = cfbvp(&args);
    assert!(a.status.success());
    assert!(stdout(&a).contains("total violations: 0"), "{}", stdout(&a));
    assert_eq!(a.stdout, cfbvp(&args).stdout);
}

#[test]
fn kernel_verify_validates_arguments() {
    let base = ["kernel", "verify", "--alpha", "1.5", "--lambda", "1", "--eta", "0.5"];
    let o = cfbvp(&[&base[..], &["--theta", "0.6"]].concat());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("theta must lie in (0, 1/2)"));
    let o = cfbvp(&[&base[..], &["--samples", "0"]].concat());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn solve_writes_a_positive_solution() {
    let dir = tempfile::tempdir().unwrap();
    let file = write(dir.path(), "one.json", EXAMPLE_ONE);
    let out = dir.path().join("x.csv");
    let o = cfbvp(&["solve", s(&file), "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let summary = stdout(&o);
    for key in ["status: converged", "ode residual", "x(0) residual", "nonlocal boundary residual", "cone ratio"] {
        assert!(summary.contains(key), "{summary}");
    }

    let csv = fs::read_to_string(&out).unwrap();
    assert!(!csv.contains('\r'));
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,x"));
    let rows: Vec<(f64, f64)> = lines
        .map(|l| {
            let (t, x) = l.split_once(',').unwrap();
            (t.parse().unwrap(), x.parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 401);
    assert_eq!(rows[0], (0.0, 0.0));
    assert!(rows.iter().filter(|r| r.0 > 0.0 && r.0 < 1.0).all(|r| r.1 > 0.0));
}

#[test]
fn solve_output_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let file = write(dir.path(), "one.json", EXAMPLE_ONE);
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    let oa = cfbvp(&["solve", s(&file), "--grid-n", "100", "--out", s(&a)]);
    let ob = cfbvp(&["solve", s(&file), "--grid-n", "100", "--out", s(&b)]);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_eq!(stdout(&oa).replace(s(&a), ""), stdout(&ob).replace(s(&b), ""));
}

#[test]
fn solve_with_zero_source_gives_zero() {
    let dir = tempfile::tempdir().unwrap();
    let file = write(dir.path(), "zero.json", r#"{"alpha": 1.7, "lambda": 1, "eta": 0.5, "f": "0"}"#);
    let out = dir.path().join("x.csv");
    let o = cfbvp(&["solve", s(&file), "--grid-n", "20", "--out", s(&out)]);
    assert!(o.status.success());
    let csv = fs::read_to_string(&out).unwrap();
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",0")), "{csv}");
}

#[test]
fn solve_flags_non_convergence() {
    let dir = tempfile::tempdir().unwrap();
    let file = write(dir.path(), "one.json", EXAMPLE_ONE);
    let out = dir.path().join("x.csv");
    let o = cfbvp(&["solve", s(&file), "--grid-n", "50", "--max-iter", "2", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("last iterate"));
    assert_eq!(fs::read_to_string(&out).unwrap().lines().count(), 52);
}

#[test]
fn solve_reports_input_errors() {
    let dir = tempfile::tempdir().unwrap();
    let o = cfbvp(&["solve", s(&dir.path().join("missing.json"))]);
    assert_eq!(o.status.code(), Some(2));

    let bad = write(dir.path(), "bad.json", r#"{"alpha": 1.5, "lambda": 1, "eta": 0.5, "f": "x -"}"#);
    let o = cfbvp(&["solve", s(&bad)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`f`"), "{}", stderr(&o));

    let neg = write(dir.path(), "neg.json", r#"{"alpha": 1.5, "lambda": 1, "eta": 0.5, "f": "x - 1"}"#);
    assert_eq!(cfbvp(&["solve", s(&neg)]).status.code(), Some(2));

    let file = write(dir.path(), "one.json", EXAMPLE_ONE);
    let o = cfbvp(&["solve", s(&file), "--damping", "1.5", "--out", s(&dir.path().join("x.csv"))]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn check_reports_superlinear_at_zero() {
    let dir = tempfile::tempdir().unwrap();
    let file = write(dir.path(), "two.json", EXAMPLE_TWO);
    let out = dir.path().join("r.json");
    let args =
        ["check", s(&file), "--theta-min", "0.38", "--theta-max", "0.42", "--theta-steps", "51", "--out", s(&out)];
    let o = cfbvp(&args);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).lines().any(|l| l.starts_with("thm31") && l.contains("satisfied at 51 of 51")));

    let text = fs::read_to_string(&out).unwrap();
    let doc: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(doc["lambda2"].as_f64(), Some(1.875));
    assert_eq!(doc["lambda1_curve"].as_array().unwrap().len(), 51);
    assert_eq!(doc["verdicts"]["thm31"], "satisfied");
    assert_eq!(doc["verdicts"]["witness_thetas"].as_array().unwrap().len(), 51);
    assert_eq!(doc["growth"]["f0"].as_f64(), Some(400.0));

    cfbvp(&args);
    assert_eq!(fs::read_to_string(&out).unwrap(), text);
}

#[test]
fn check_reports_limiting_case_and_inconclusive() {
    let dir = tempfile::tempdir().unwrap();
    let one = write(dir.path(), "one.json", EXAMPLE_ONE);
    let o = cfbvp(&["check", s(&one)]);
    assert!(o.status.success());
    let doc: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["verdicts"]["cor31"], "satisfied");
    assert_eq!(doc["growth"]["f0"], "inf");
    assert!(stderr(&o).contains("estimated by sampling"));

    let lin = write(dir.path(), "lin.json", r#"{"alpha": 1.5, "lambda": 1, "eta": 0.5, "f": "x"}"#);
    let o = cfbvp(&["check", s(&lin), "--theta-steps", "5"]);
    let doc: Value = serde_json::from_str(&stdout(&o)).unwrap();
    for key in ["thm31", "thm32", "cor31"] {
        assert_eq!(doc["verdicts"][key], "inconclusive");
    }
}

#[test]
fn check_validates_theta_range() {
    let dir = tempfile::tempdir().unwrap();
    let one = write(dir.path(), "one.json", EXAMPLE_ONE);
    let o = cfbvp(&["check", s(&one), "--theta-min", "0.3", "--theta-max", "0.2"]);
    assert_eq!(o.status.code(), Some(2));
    let o = cfbvp(&["check", s(&one), "--theta-max", "0.5"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn builtin_examples_pass() {
    for which in ["1", "2"] {
        let o = cfbvp(&["examples", which]);
        let out = stdout(&o);
        assert!(o.status.success(), "{out}");
        assert!(!out.contains("FAIL"));
        assert!(out.lines().all(|l| l.starts_with("PASS ")), "{out}");
    }
    let out = stdout(&cfbvp(&["examples", "2"]));
    assert!(out.contains("Lambda2 = 1.875"));
    assert!(out.contains("at 51 of 51 grid points"));
    assert_eq!(cfbvp(&["examples", "3"]).status.code(), Some(2));
}
