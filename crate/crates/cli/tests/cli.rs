use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn hmu(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hmu"))
        .args(args)
        .output()
        .expect("run hmu")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

const LEBESGUE: &str = r#"{"type": "power", "gamma": 0, "scale": 1}"#;

#[test]
fn moments_of_lebesgue_as_csv() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "m.json", LEBESGUE);
    let out = hmu(&[
        "moments",
        "--measure",
        m.to_str().unwrap(),
        "--M",
        "3",
        "--format",
        "csv",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let values: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(values, vec![1.0, 0.5, 1.0 / 3.0, 0.25]);
    assert!(text.starts_with("n,value,method\n"));
}

#[test]
fn moments_of_power_weight_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(
        dir.path(),
        "m.json",
        r#"{"type": "power", "gamma": 1, "scale": 1}"#,
    );
    let out_path = dir.path().join("out.json");
    let out = hmu(&[
        "moments",
        "--measure",
        m.to_str().unwrap(),
        "--M",
        "2",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success() && out.stdout.is_empty());
    let v: Value = serde_json::from_str(&fs::read_to_string(out_path).unwrap()).unwrap();
    let got: Vec<f64> = v["values"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect();
    for (g, w) in got.iter().zip([0.5, 1.0 / 6.0, 1.0 / 12.0]) {
        assert!((g - w).abs() < 1e-15);
    }
    assert_eq!(v["passed"], Value::Bool(true));
}

#[test]
fn malformed_spec_is_rejected_with_position() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(
        dir.path(),
        "bad.json",
        "{\"type\": \"power\",\n \"gamma\": }",
    );
    let out = hmu(&["moments", "--measure", m.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
    let invalid = write(
        dir.path(),
        "neg.json",
        r#"{"type": "power", "gamma": -1.5, "scale": 1}"#,
    );
    assert_eq!(
        hmu(&["moments", "--measure", invalid.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn classify_reports_verdicts_and_prediction() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "m.json", LEBESGUE);
    let v = json(&hmu(&[
        "classify",
        "--measure",
        m.to_str().unwrap(),
        "--s",
        "1",
        "--p",
        "1",
        "--q",
        "1",
    ]));
    assert_eq!(v["tail"]["verdict"], "finite");
    assert!((v["tail"]["sup_value"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(v["prediction"]["verdict"], "unbounded");

    let lp = write(
        dir.path(),
        "lp.json",
        r#"{"type": "logpower", "s": 1, "alpha": 2, "scale": 1}"#,
    );
    let v = json(&hmu(&[
        "classify",
        "--measure",
        lp.to_str().unwrap(),
        "--alpha",
        "1",
        "--p",
        "1",
        "--q",
        "1",
    ]));
    assert_eq!(v["log"]["vanishing"], Value::Bool(true));
    assert_eq!(v["prediction"]["verdict"], "compact");

    let out = hmu(&["classify", "--measure", m.to_str().unwrap(), "--p", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn classify_csv_ends_with_verdict_record() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "m.json", LEBESGUE);
    let out = hmu(&[
        "classify",
        "--measure",
        m.to_str().unwrap(),
        "--s",
        "2",
        "--format",
        "csv",
    ]);
    assert!(out.status.success());
    let mut r = csv::ReaderBuilder::new()
        .flexible(true)
        .from_reader(out.stdout.as_slice());
    assert_eq!(
        r.headers().unwrap(),
        vec!["functional", "j", "a_j", "value"]
    );
    let records: Vec<csv::StringRecord> = r.records().map(|x| x.unwrap()).collect();
    let last = records.last().unwrap();
    assert_eq!(&last[0], "verdict");
    let verdicts: Value = serde_json::from_str(&last[1]).unwrap();
    assert_eq!(verdicts["tail"]["verdict"], "divergent");
    assert_eq!(verdicts["moment"]["verdict"], "divergent");
}

#[test]
fn apply_impulse_and_agreement() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "m.json", LEBESGUE);
    let f = write(dir.path(), "f.json", "[1]");
    let v = json(&hmu(&[
        "apply",
        "--measure",
        m.to_str().unwrap(),
        "--coeffs",
        f.to_str().unwrap(),
        "--N",
        "512",
    ]));
    assert!(v["residual"].as_f64().unwrap() <= 1e-12);
    for (n, c) in v["output"].as_array().unwrap().iter().enumerate() {
        assert_eq!(c[0].as_f64().unwrap(), 1.0 / (n as f64 + 1.0));
    }
    let at_half = &v["agreement"]["points"][0];
    assert_eq!(at_half["z"][0].as_f64().unwrap(), 0.5);
    let two_log_two = 2.0 * 2f64.ln();
    assert!((at_half["integral"][0].as_f64().unwrap() - two_log_two).abs() < 1e-12);
    assert!((at_half["series"][0].as_f64().unwrap() - two_log_two).abs() < 1e-12);

    let shifted = write(dir.path(), "g.json", "[0, [0, 0], 1]");
    let v = json(&hmu(&[
        "apply",
        "--measure",
        m.to_str().unwrap(),
        "--coeffs",
        shifted.to_str().unwrap(),
        "--N",
        "64",
    ]));
    assert_eq!(v["output"][0][0].as_f64().unwrap(), 1.0 / 3.0);
    assert!(v["agreement"].is_null() && v["agreement_skipped"].is_string());
}

#[test]
fn apply_rejects_oversized_input() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "m.json", LEBESGUE);
    let f = write(dir.path(), "f.json", "[1, 2, 3]");
    let out = hmu(&[
        "apply",
        "--measure",
        m.to_str().unwrap(),
        "--coeffs",
        f.to_str().unwrap(),
        "--N",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn schatten_ladder_csv_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(
        dir.path(),
        "m.json",
        r#"{"type": "atomic", "points": [0.5], "weights": [1]}"#,
    );
    let out = hmu(&[
        "schatten",
        "--measure",
        m.to_str().unwrap(),
        "--ladder",
        "16,32,64",
        "--format",
        "csv",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(
        text.lines().next(),
        Some("N,schatten_partial,criterion_partial")
    );
    assert_eq!(text.lines().count(), 4);
    let v = json(&hmu(&[
        "schatten",
        "--measure",
        m.to_str().unwrap(),
        "--N",
        "128",
    ]));
    assert_eq!(v["membership"]["verdict"], "in_Sp");
    assert!(v["frobenius"]
        .as_array()
        .unwrap()
        .iter()
        .all(|c| c["relative_error"].as_f64().unwrap() <= 1e-10));
}

#[test]
fn verify_rejects_out_of_range_corruption() {
    let out = hmu(&["verify", "--corrupt-moment", "100000"]);
    assert_eq!(out.status.code(), Some(2));
}
