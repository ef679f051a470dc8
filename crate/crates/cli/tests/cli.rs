use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ale_cli::config::{parse_jobs, Command as Job, JobConfig};
use ale_cli::report::RunReport;
use ale_cli::run;
use serde_json::Value;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn ale(args: &[&str], out: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_ale"));
    cmd.args(args).env_remove("ALE_OUT_DIR");
    if let Some(dir) = out {
        cmd.arg("--out").arg(dir);
    }
    cmd.output().expect("ale runs")
}

fn read_report(path: &Path) -> RunReport {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn csv_header(path: &Path) -> Vec<String> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.headers().unwrap().iter().map(String::from).collect()
}

#[test]
fn calabi_config_writes_report_and_profile() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("calabi.json");
    let out = ale(&["--config", cfg.to_str().unwrap()], Some(dir.path()));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = read_report(&dir.path().join("calabi.json"));
    assert!(report.passed());
    assert!((report.results["fitted_a"].as_f64().unwrap() + 0.5).abs() < 1e-6);
    assert!(report.results["ricci_residual_closed_form"].as_f64().unwrap() < 1e-13);
    assert!(report.checks.iter().all(|c| !c.provenance.is_empty()));
    assert_eq!(csv_header(&dir.path().join("calabi.csv")), ["r", "phi", "phi_prime", "eig_radial", "eig_transverse"]);
}

#[test]
fn profile_schemas() {
    let poisson = run(&parse_jobs(&fs::read_to_string(configs().join("poisson.json")).unwrap()).unwrap()[0]).unwrap();
    assert_eq!(poisson.profile.unwrap().headers, ["r", "u", "A*rho^{2-n}", "v"]);
    let pipeline = run(&JobConfig::new(Job::Pipeline).with_grid(1e-4, 1e8, 1200).with("steps", 2)).unwrap();
    assert!(pipeline.report.passed(), "{:?}", pipeline.report.failures().collect::<Vec<_>>());
    let p = pipeline.profile.unwrap();
    assert_eq!(p.headers, ["r", "f", "phi", "psi", "ma_residual"]);
    assert_eq!(p.rows(), 1200);
}

#[test]
fn csv_values_round_trip_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let job = JobConfig::new(Job::Calabi).with("m", 3).with_grid(1e-3, 1e6, 64);
    let out = run(&job).unwrap();
    ale_cli::output::emit(&out, dir.path(), "c").unwrap();
    let mut r = csv::Reader::from_path(dir.path().join("c.csv")).unwrap();
    let profile = out.profile.unwrap();
    for (i, row) in r.records().enumerate() {
        for (j, field) in row.unwrap().iter().enumerate() {
            assert_eq!(field.parse::<f64>().unwrap().to_bits(), profile.columns[j][i].to_bits());
        }
    }
}

#[test]
fn config_echo_reproduces_the_run() {
    let jobs = [
        JobConfig::new(Job::Calabi).with("m", 4),
        JobConfig::new(Job::MaSolve).with_grid(1e-3, 1e7, 1500),
        JobConfig::new(Job::Identities).with("samples", 50).with("seed", 7),
        JobConfig::new(Job::Quotient).with("m", 4).with("k", 5).with("exponents", [1, 4, 2, 3]),
        JobConfig::new(Job::Norms),
    ];
    for job in jobs {
        let first = run(&job).unwrap().report;
        let echoed = serde_json::to_string(&first.config_echo).unwrap();
        let parsed = parse_jobs(&echoed).unwrap();
        assert_eq!(parsed.len(), 1);
        assert_eq!(parsed[0], first.config_echo, "echo parses back to itself");
        let second = run(&parsed[0]).unwrap().report;
        assert_eq!(second.config_echo, first.config_echo);
        assert_eq!(second.results, first.results);
        assert_eq!(second.checks, first.checks);
    }
}

#[test]
fn identical_configs_give_identical_json() {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let cfg = configs().join("ma_solve.json");
    let mut texts = Vec::new();
    for d in &dirs {
        assert!(ale(&["--config", cfg.to_str().unwrap()], Some(d.path())).status.success());
        let report = read_report(&d.path().join("ma-solve.json")).without_timing();
        texts.push(serde_json::to_string_pretty(&report).unwrap());
        texts.push(fs::read_to_string(d.path().join("ma-solve.csv")).unwrap());
    }
    assert_eq!(texts[0], texts[2]);
    assert_eq!(texts[1], texts[3]);
}

#[test]
fn quotient_example_is_terminal() {
    let job = &parse_jobs(&fs::read_to_string(configs().join("quotient.json")).unwrap()).unwrap()[0];
    let report = run(job).unwrap().report;
    assert_eq!(report.results["terminal"], Value::Bool(true));
    assert_eq!(report.results["symplectic_pairing"], Value::Bool(true));
    assert!(report.passed());
}

#[test]
fn batch_runs_in_parallel_with_prefixed_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("batch.json");
    let out = ale(&["--config", cfg.to_str().unwrap(), "--jobs", "3"], Some(dir.path()));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let mut names: Vec<String> =
        fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    names.sort();
    assert_eq!(
        names,
        ["00-calabi-m3.csv", "00-calabi-m3.json", "01-identities.json", "02-norms.json", "03-scan-m4.json"]
    );
}

#[test]
fn environment_supplies_default_output_directory() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("quotient.json");
    let out = Command::new(env!("CARGO_BIN_EXE_ale"))
        .args(["--config", cfg.to_str().unwrap()])
        .env("ALE_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(dir.path().join("quotient.json").exists());
}

#[test]
fn exit_status_reflects_checks_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    // a fit window near the divisor cannot isolate the t^{1−m} term
    let failing = dir.path().join("failing.json");
    fs::write(&failing, r#"{"command": "calabi", "parameters": {"fit_window_t": [0.5, 5.0]}}"#).unwrap();
    let out = ale(&["--config", failing.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("[FAIL] asymptotic_coefficient"));

    let unknown = dir.path().join("unknown.json");
    fs::write(&unknown, r#"{"command": "frobnicate"}"#).unwrap();
    assert_eq!(ale(&["--config", unknown.to_str().unwrap()], None).status.code(), Some(2));

    let bad_param = dir.path().join("bad.json");
    fs::write(&bad_param, r#"{"command": "calabi", "parameters": {"n": 3}}"#).unwrap();
    let out = ale(&["--config", bad_param.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("malformed parameters"));

    let module_error = dir.path().join("module.json");
    fs::write(&module_error, r#"{"command": "pipeline", "parameters": {"R": 1.2}}"#).unwrap();
    let out = ale(&["--config", module_error.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("command pipeline failed"));

    assert_eq!(ale(&[], None).status.code(), Some(2));
}

#[test]
fn printed_defaults_are_runnable() {
    for name in ["calabi", "norms", "quotient", "identities"] {
        let out = ale(&["--print-config", name], None);
        assert!(out.status.success());
        let jobs = parse_jobs(&String::from_utf8(out.stdout).unwrap()).unwrap();
        assert_eq!(jobs[0].command.name(), name);
        let report = run(&jobs[0]).unwrap().report;
        assert_eq!(report.config_echo, jobs[0]);
    }
}
