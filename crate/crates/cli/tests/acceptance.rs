//! Acceptance suite: one pass/fail line per criterion, nonzero exit on any
//! failure. Criteria 1-11 run through the library check suite; criterion 12
//! drives the built binary.

use std::path::Path;
use std::process::{Command, ExitCode};

use hmu::verify::{run_check, VerifyConfig, CHECKS};

fn verify_run(out: &Path, extra: &[&str]) -> Option<i32> {
    Command::new(env!("CARGO_BIN_EXE_hmu"))
        .arg("verify")
        .arg("--out")
        .arg(out)
        .args(extra)
        .stderr(std::process::Stdio::null())
        .status()
        .ok()
        .and_then(|s| s.code())
}

fn cli_criterion() -> (bool, String) {
    let dir = tempfile::tempdir().expect("temp dir");
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let c = dir.path().join("c.json");
    let clean = verify_run(&a, &[]);
    let again = verify_run(&b, &[]);
    let corrupted = verify_run(&c, &["--corrupt-moment"]);
    let identical = match (std::fs::read(&a), std::fs::read(&b)) {
        (Ok(x), Ok(y)) => x == y,
        _ => false,
    };
    let ok = clean == Some(0)
        && again == Some(0)
        && corrupted.is_some_and(|code| code != 0)
        && identical;
    (
        ok,
        format!("clean exit {clean:?}, corrupted exit {corrupted:?}, byte-identical reports {identical}"),
    )
}

fn main() -> ExitCode {
    let cfg = VerifyConfig::default();
    let mut all = true;
    for (i, name) in CHECKS.iter().enumerate() {
        let r = run_check(i + 1, &cfg);
        all &= r.passed;
        println!(
            "criterion {:>2} {:<32} {}",
            i + 1,
            name,
            if r.passed { "PASS" } else { "FAIL" }
        );
        for f in &r.failures {
            println!("             {f}");
        }
    }
    let (ok, detail) = cli_criterion();
    all &= ok;
    println!(
        "criterion 12 {:<32} {}",
        "CLI exit codes and determinism",
        if ok { "PASS" } else { "FAIL" }
    );
    if !ok {
        println!("             {detail}");
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
