//! The ten acceptance criteria, one PASS/FAIL line each.
//!
//! Criteria 1–9 come from the suite in `ale_cli::suite`. Criterion 10 runs
//! `ale --check` twice as separate processes and compares the written
//! `check_summary.json` files byte for byte, in addition to the in-process
//! repetition the suite performs itself.

use std::process::Command;

use ale_cli::suite::{format_outcome, run_suite};

fn check_twice_via_binary() -> (bool, String) {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let mut bytes = Vec::new();
    for d in &dirs {
        let status = Command::new(env!("CARGO_BIN_EXE_ale"))
            .args(["--check", "--jobs", "4", "--out"])
            .arg(d.path())
            .env_remove("ALE_OUT_DIR")
            .output()
            .expect("ale runs");
        if !status.status.success() {
            return (false, format!("ale --check exited with {}", status.status));
        }
        bytes.push(std::fs::read(d.path().join("check_summary.json")).expect("summary written"));
    }
    let same = bytes[0] == bytes[1];
    (same, format!("{} bytes, identical: {same}", bytes[0].len()))
}

fn main() {
    let run = run_suite(4).expect("suite runs");
    let mut all_pass = true;
    for c in &run.summary.criteria {
        if c.id == 10 {
            let (same, detail) = check_twice_via_binary();
            let pass = c.pass && same;
            all_pass &= pass;
            println!(
                "criterion {:>2}: {}  {} (in-process repeat: {}; two processes: {detail})",
                c.id,
                if pass { "PASS" } else { "FAIL" },
                c.title,
                if c.pass { "identical" } else { "different" },
            );
        } else {
            all_pass &= c.pass;
            println!("{}", format_outcome(c));
        }
    }
    assert_eq!(run.summary.criteria.len(), 10);
    if !all_pass {
        eprintln!("some acceptance criteria failed");
        std::process::exit(1);
    }
}
