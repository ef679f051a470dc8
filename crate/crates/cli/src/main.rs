#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::Parser;

use ale_cli::config::{load_jobs, Command, JobConfig};
use ale_cli::report::JobOutput;
use ale_cli::{output, run_batch, suite};

/// Experiments on radial ALE Kähler metrics.
///
/// Output directory precedence: `--out`, then `output.directory` in the job
/// config, then `ALE_OUT_DIR`. Without any of them reports go to stdout.
///
/// Exit status: 0 if every check passes, 1 if some check fails, 2 on errors.
#[derive(Parser, Debug)]
#[command(name = "ale", version)]
struct Cli {
    /// Job config: one job object, a list of jobs, or {"jobs": [...]}.
    #[arg(long, value_name = "PATH", conflicts_with = "check")]
    config: Option<PathBuf>,
    /// Directory for reports and profiles.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads for batches and the acceptance suite.
    #[arg(long, value_name = "N", default_value_t = default_workers())]
    jobs: usize,
    /// Run the acceptance suite and write check_summary.json.
    #[arg(long)]
    check: bool,
    /// Print a job config with every default filled in, then exit.
    #[arg(long, value_name = "COMMAND", conflicts_with_all = ["config", "check"])]
    print_config: Option<String>,
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn env_out_dir() -> Option<PathBuf> {
    std::env::var_os("ALE_OUT_DIR").filter(|v| !v.is_empty()).map(PathBuf::from)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: &Cli) -> Result<bool> {
    if let Some(name) = &cli.print_config {
        return print_config(name).map(|_| true);
    }
    if cli.check {
        return check(cli.out.clone().or_else(env_out_dir).as_deref(), cli.jobs);
    }
    let Some(path) = &cli.config else {
        bail!("nothing to do: pass --config <PATH>, --check or --print-config <COMMAND>");
    };
    let jobs = load_jobs(path)?;
    let outputs = run_batch(&jobs, cli.jobs)?;
    let batch = jobs.len() > 1;
    let mut all_pass = true;
    let mut failed = 0;
    for (i, (job, out)) in jobs.iter().zip(outputs).enumerate() {
        let stem = if batch { format!("{i:02}-{}", job.stem()) } else { job.stem() };
        match out {
            Ok(o) => {
                all_pass &= o.report.passed();
                let dir = cli.out.clone().or_else(|| job.output.directory.clone()).or_else(env_out_dir);
                report(&stem, &o, dir.as_deref())?;
            }
            Err(e) => {
                failed += 1;
                eprintln!("{stem}: error: {e:#}");
            }
        }
    }
    if failed > 0 {
        bail!("{failed} of {} jobs failed", jobs.len());
    }
    Ok(all_pass)
}

fn report(stem: &str, o: &JobOutput, dir: Option<&Path>) -> Result<()> {
    let r = &o.report;
    println!("{stem}: {} ({:.2}s)", if r.passed() { "PASS" } else { "FAIL" }, r.wall_time);
    for c in &r.checks {
        println!(
            "  [{}] {}: computed {:e}, target {:e}, tolerance {:e} ({})",
            if c.pass { "ok" } else { "FAIL" },
            c.name,
            c.computed,
            c.target,
            c.tolerance,
            c.provenance
        );
    }
    match dir {
        Some(dir) => {
            for path in output::emit(o, dir, stem)? {
                println!("  wrote {}", path.display());
            }
        }
        None => print!("{}", output::to_json(r)?),
    }
    Ok(())
}

fn check(dir: Option<&Path>, workers: usize) -> Result<bool> {
    let run = suite::run_suite(workers)?;
    for c in &run.summary.criteria {
        println!("{}", suite::format_outcome(c));
    }
    if let Some(dir) = dir {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let path = dir.join("check_summary.json");
        std::fs::write(&path, &run.summary_json).with_context(|| format!("writing {}", path.display()))?;
        println!("wrote {}", path.display());
    }
    Ok(run.summary.passed())
}

fn print_config(name: &str) -> Result<()> {
    let command = Command::ALL
        .into_iter()
        .find(|c| c.name() == name)
        .with_context(|| format!("unknown command {name:?}"))?;
    let mut job = JobConfig::new(command);
    if let serde_json::Value::Object(map) = ale_cli::commands::default_parameters(command) {
        job.parameters = map;
    }
    print!("{}", output::to_json(&job)?);
    Ok(())
}
