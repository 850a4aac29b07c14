use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn run(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_metric-entropy"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn report(out: &Path, command: &str) -> Value {
    let text = std::fs::read_to_string(out.join(format!("{command}.json"))).unwrap();
    let v: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["command"], command);
    v["report"].clone()
}

fn csv_rows(out: &Path, command: &str) -> Vec<csv::StringRecord> {
    let mut r = csv::Reader::from_path(out.join(format!("{command}.csv"))).unwrap();
    r.records().map(|x| x.unwrap()).collect()
}

fn num(v: &Value) -> f64 {
    v.as_f64().unwrap_or_else(|| panic!("not a number: {v}"))
}

#[test]
fn identical_pairs_are_at_distance_zero() {
    let dir = TempDir::new().unwrap();
    let pairs = fixture("identical.jsonl");
    let o = run(dir.path(), &["dist", "--space", "SO(2)/Gr(1)", "--seed", "1", "--pairs", pairs.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rows = report(dir.path(), "dist")["rows"].as_array().unwrap().clone();
    assert_eq!(rows.len(), 2);
    for r in rows {
        assert_eq!(num(&r["extrinsic"]), 0.0);
        assert!(num(&r["intrinsic"]) <= 1e-12);
        assert!(num(&r["quotient"]["value"]) <= 1e-12);
    }
}

#[test]
fn lines_at_forty_five_degrees_are_a_quarter_pi_apart() {
    let dir = TempDir::new().unwrap();
    let pairs = fixture("lines_45.jsonl");
    let o = run(
        dir.path(),
        &["dist", "--space", "SO(2)/Gr(1)", "--seed", "1", "--format", "json,csv", "--pairs", pairs.to_str().unwrap()],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rows = csv_rows(dir.path(), "dist");
    assert_eq!(rows.len(), 1);
    assert_eq!(&rows[0][0], "2");
    let quotient: f64 = rows[0][3].parse().unwrap();
    let intrinsic: f64 = rows[0][2].parse().unwrap();
    assert!((quotient - FRAC_PI_4).abs() < 1e-12);
    assert!((intrinsic - FRAC_PI_4).abs() < 1e-12);
    assert_eq!(&rows[0][4], "closed_form_grassmann");
}

#[test]
fn malformed_pair_files_are_input_errors() {
    let dir = TempDir::new().unwrap();
    let pairs = fixture("truncated.jsonl");
    let o = run(dir.path(), &["dist", "--space", "SO(2)/Gr(1)", "--seed", "1", "--pairs", pairs.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    let err = stderr(&o);
    assert!(err.contains("error[malformed-input]") && err.contains(":2:"), "{err}");

    let o = run(dir.path(), &["dist", "--space", "U(2)", "--seed", "1", "--pairs", "/nonexistent/pairs.jsonl"]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));

    let wrong_group = fixture("lines_45.jsonl");
    let o = run(dir.path(), &["dist", "--space", "U(3)", "--seed", "1", "--pairs", wrong_group.to_str().unwrap()]);
    assert_ne!(code(&o), 0);
}

#[test]
fn invariants_of_the_projective_plane() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), &["invariants", "--space", "SO(3)/Gr(1)", "--seed", "3"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let inv = &report(dir.path(), "invariants")["invariants"];
    assert_eq!(inv["dim"], 2);
    assert!((num(&inv["kappa"]["value"]) - 1.0).abs() <= 1e-9);
    assert_eq!(num(&inv["theta"]["value"]), PI);
    assert_eq!(num(&inv["diameter"]["value"]), FRAC_PI_2);
}

#[test]
fn invariants_of_the_phase_circle() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), &["invariants", "--space", "U(2)/SU", "--seed", "3", "--format", "csv"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(!dir.path().join("invariants.json").exists());
    let rows = csv_rows(dir.path(), "invariants");
    assert_eq!(&rows[0][1], "1");
    let diameter: f64 = rows[0][7].parse().unwrap();
    assert!((diameter - FRAC_PI_2).abs() < 1e-15);
}

#[test]
fn block_diagonal_classification() {
    let dir = TempDir::new().unwrap();
    let o = run(
        dir.path(),
        &["invariants", "--space", "U(6)/Block(2,2,2)", "--seed", "3", "--alpha", "0.3333333333333333"],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = report(dir.path(), "invariants");
    let kappa = num(&r["invariants"]["kappa"]["value"]);
    assert!(kappa > 1.0 && kappa <= 2.0, "{kappa}");
    assert_eq!(r["regime"]["regime"], "c");
}

#[test]
fn custom_subgroup_without_torus_is_unsupported() {
    let dir = TempDir::new().unwrap();
    let space = r#"{"group":{"family":"U","n":2},"subgroup":{"variant":"custom","basis":[{"n":2,"field":"complex","re":[[0,0],[0,0]],"im":[[1,0],[0,-1]]}]}}"#;
    let o = run(dir.path(), &["invariants", "--space", space, "--seed", "3"]);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("error[unsupported-invariant]"), "{}", stderr(&o));
}

#[test]
fn circle_packing_at_quarter_turn() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), &["pack", "--space", "U(1)", "--seed", "5", "--eps", "1.5707963267948966"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = report(dir.path(), "pack");
    let rows = r["packings"].as_array().unwrap();
    assert_eq!(rows[0]["cardinality"], 3);
    assert_eq!(rows[0]["separated"], true);
}

#[test]
fn verify_all_passes() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), &["verify", "--space", "U(3)", "--seed", "42", "--budget-trials", "60"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = report(dir.path(), "verify");
    assert_eq!(r["pass"], true);
    assert!(r["checks"].as_array().unwrap().len() >= 6);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("verify.json"));
}

#[test]
fn unknown_and_inapplicable_suites() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), &["verify", "--space", "U(3)", "--seed", "1", "--suite", "nonsense"]);
    assert_eq!(code(&o), 2);
    let o = run(dir.path(), &["verify", "--space", "SO(3)", "--seed", "1", "--suite", "su_circle"]);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("error[unsupported-check]"), "{}", stderr(&o));
}

#[test]
fn short_profiles_are_invalid_parameters() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), &["profile", "--space", "U(1)", "--seed", "1", "--eps", "0.3,0.5"]);
    assert_eq!(code(&o), 4);
    assert!(stderr(&o).contains("error[invalid-parameter]"));
}

#[test]
fn missing_seed_and_bad_space_are_rejected() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&run(dir.path(), &["invariants", "--space", "U(2)"])), 2);
    assert_eq!(code(&run(dir.path(), &["invariants", "--space", "V(2)", "--seed", "1"])), 2);
    assert_eq!(code(&run(dir.path(), &["invariants", "--space", "U(3)/Gr(5)", "--seed", "1"])), 4);
    assert_eq!(code(&run(dir.path(), &["frobnicate"])), 2);
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let dir = TempDir::new().unwrap();
    let cfg = fixture("sweep.toml");
    let o = run(dir.path(), &["pack", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("pack.json")).unwrap()).unwrap();
    assert_eq!(v["config"]["seed"], 11);
    assert_eq!(v["config"]["eps"].as_array().unwrap().len(), 4);
    assert_eq!(csv_rows(dir.path(), "pack").len(), 4);

    let o = run(dir.path(), &["pack", "--config", cfg.to_str().unwrap(), "--seed", "12", "--eps", "0.5"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("pack.json")).unwrap()).unwrap();
    assert_eq!(v["config"]["seed"], 12);
    assert_eq!(v["config"]["eps"].as_array().unwrap().len(), 1);
}

#[test]
fn csv_floats_use_round_trip_scientific_notation() {
    let dir = TempDir::new().unwrap();
    let pairs = fixture("lines_45.jsonl");
    let o = run(
        dir.path(),
        &["dist", "--space", "SO(2)/Gr(1)", "--seed", "1", "--format", "csv", "--pairs", pairs.to_str().unwrap()],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rows = csv_rows(dir.path(), "dist");
    let field = &rows[0][3];
    assert!(field.contains('e'), "{field}");
    let mantissa = field.split('e').next().unwrap();
    assert_eq!(mantissa.split('.').nth(1).unwrap().len(), 16, "{field}");
}

#[test]
fn repeated_runs_are_byte_identical() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    let args = ["volume", "--space", "SO(3)/Gr(1)", "--seed", "8", "--eps", "0.5,1", "--budget-volume-samples", "500", "--format", "json,csv"];
    assert_eq!(code(&run(a.path(), &args)), 0);
    assert_eq!(code(&run(b.path(), &args)), 0);
    for name in ["volume.json", "volume.csv"] {
        assert_eq!(std::fs::read(a.path().join(name)).unwrap(), std::fs::read(b.path().join(name)).unwrap());
    }
}
