use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const QUARTERCIRCLE: &str =
    r#"{"atoms":[],"pieces":[{"lo":0,"hi":4,"kind":"quartercircle","params":{"alpha":4}}],"radius":4}"#;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_freefisher")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn row(out: &str, name: &str) -> String {
    out.lines()
        .find_map(|l| l.strip_prefix(name).filter(|rest| rest.starts_with(' ')))
        .unwrap_or_else(|| panic!("no row `{name}` in\n{out}"))
        .trim()
        .to_string()
}

fn manifest(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn fisher_of_square_root_of_quartercircle() {
    let dir = tempfile::tempdir().unwrap();
    let qc = write(dir.path(), "quartercircle.json", QUARTERCIRCLE);
    let o = run(&["fisher", &format!("sqrt({})", qc.display())]);
    assert!(o.status.success());
    assert_eq!(row(&stdout(&o), "fisher"), "1.0");
    let o = run(&["fisher", "sqrt(quartercircle(4))"]);
    assert_eq!(row(&stdout(&o), "fisher"), "1.0");
}

#[test]
fn verify_lemma39_passes() {
    let dir = tempfile::tempdir().unwrap();
    let qc = write(dir.path(), "quartercircle.json", QUARTERCIRCLE);
    let out = dir.path().join("run.json");
    let o = run(&["verify", "lemma39", "--nu", qc.to_str().unwrap(), "--degree", "8", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(row(&stdout(&o), "max_violation"), "0.0");
    let m = manifest(&out);
    assert_eq!(m["command"], "verify");
    assert_eq!(m["exit_code"], 0);
    assert_eq!(m["details"]["passed"], true);
}

#[test]
fn bound_t13_at_d2() {
    let dir = tempfile::tempdir().unwrap();
    let qc = write(dir.path(), "quartercircle.json", QUARTERCIRCLE);
    let o = run(&["bound", "--theorem", "T13", "--nu", qc.to_str().unwrap(), "--d", "2"]);
    assert!(o.status.success());
    assert_eq!(row(&stdout(&o), "T13(d=2)"), "16.0");
}

#[test]
fn every_printed_number_is_in_the_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run.json");
    let o = run(&["entropy", "semicircle(2)", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let m = manifest(&out);
    let outputs = m["outputs"].as_array().unwrap();
    let text = stdout(&o);
    let printed: Vec<&str> = text.lines().map(|l| l.split_whitespace().last().unwrap()).collect();
    assert_eq!(printed.len(), outputs.len());
    for (p, rec) in printed.iter().zip(outputs) {
        assert_eq!(*p, rec["value"].to_string());
        assert!(!rec["provenance"].as_str().unwrap().is_empty());
    }
    assert!((m["kappa"].as_f64().unwrap() - 4.0 * std::f64::consts::PI.powi(2) / 3.0).abs() < 1e-15);
}

#[test]
fn exact_moments_are_reproducible() {
    let a = stdout(&run(&["moments", "--word", "a a* a a*", "--word", "a* a a* a a* a"]));
    let b = stdout(&run(&["moments", "--word", "a a* a a*", "--word", "a* a a* a a* a"]));
    assert_eq!(a, b);
    assert_eq!(row(&a, "φ(a a* a a*)"), "2");
    assert_eq!(row(&a, "φ(a* a a* a a* a)"), "5");
    let zero = stdout(&run(&["moments", "--word", "a a"]));
    assert_eq!(row(&zero, "φ(a a)"), "0");
}

#[test]
fn circular_model_and_float_mode() {
    let o = run(&["moments", "--model", "circular", "--word", "a a* a a*"]);
    assert!(o.status.success());
    assert_eq!(row(&stdout(&o), "φ(a a* a a*)"), "2");
    let o = run(&["--float", "moments", "--nu", "uniform(0,1)", "--word", "a a*"]);
    assert!(o.status.success());
    let v: f64 = row(&stdout(&o), "φ(a a*)").parse().unwrap();
    assert!((v - 0.5).abs() < 1e-12);
}

#[test]
fn measure_subcommands() {
    let o = run(&["measure", "square", "sqrt(quartercircle(4))", "--upto", "3"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert_eq!(row(&out, "m2"), "2");
    let o = run(&["measure", "dilate", "semicircle(2)", "--lambda", "2", "--upto", "2", "--csv"]);
    let out = stdout(&o);
    assert!(out.starts_with("name,value\n"));
    assert!(out.lines().any(|l| l == "m2,4"), "{out}");
    let o = run(&["measure", "dilate", "semicircle(2)"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn input_errors_are_exit_code_3() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", "{\"atoms\": [[0, ");
    assert_eq!(run(&["fisher", bad.to_str().unwrap()]).status.code(), Some(3));
    assert_eq!(run(&["fisher", "missing.json"]).status.code(), Some(3));
    assert_eq!(run(&["fisher", "nosuchmeasure(1)"]).status.code(), Some(3));
    assert_eq!(run(&["moments", "--word", "a b"]).status.code(), Some(3));
    assert_eq!(run(&["moments", "--word", "a a* q"]).status.code(), Some(3));
    assert_eq!(run(&["verify", "nosuchsuite"]).status.code(), Some(3));
    assert_eq!(run(&["verify", "lemma39", "--alternation", "0,2"]).status.code(), Some(3));
    assert_eq!(run(&["verify", "prop36", "--nu", "uniform(0,1)"]).status.code(), Some(3));
    assert_eq!(run(&["bound", "--theorem", "T99", "--nu", "semicircle(2)"]).status.code(), Some(3));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(3));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn resource_guard_is_exit_code_4() {
    let o = run(&["simulate", "rdiagonal", "--N", "100000", "--seeds", "1"]);
    assert_eq!(o.status.code(), Some(4));
    let o = run(&["verify", "prop36", "--degree", "1000"]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn simulate_writes_manifest_with_seeds() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sim.json");
    let spec = dir.path().join("spec.csv");
    let args = [
        "--seed", "7", "simulate", "blockembed", "--N", "48", "--seeds", "3", "--spectrum",
        spec.to_str().unwrap(), "--out", out.to_str().unwrap(),
    ];
    let o = run(&args);
    assert!(o.status.success());
    let gap: f64 = row(&stdout(&o), "max |eig − (±sv)|").parse().unwrap();
    assert!(gap < 1e-10);
    let m = manifest(&out);
    assert_eq!(m["seeds"].as_array().unwrap().len(), 3);
    assert_eq!(std::fs::read_to_string(&spec).unwrap().lines().count(), 96);
    let again = run(&args);
    assert_eq!(stdout(&o), stdout(&again));
}
