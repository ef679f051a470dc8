//! Job runner, report emission and the acceptance suite behind the `ale` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod output;
pub mod report;
pub mod suite;

use std::time::Instant;

use anyhow::{Context, Result};
use rayon::prelude::*;

use config::{Command, JobConfig};
use report::{JobOutput, RunReport};

/// Runs one job: validates it, dispatches to the owning module and assembles the report.
pub fn run(config: &JobConfig) -> Result<JobOutput> {
    config.validate()?;
    let start = Instant::now();
    let out = match config.command {
        Command::Calabi => commands::calabi(config),
        Command::Poisson => commands::poisson(config),
        Command::MaSolve => commands::ma_solve(config),
        Command::Pipeline => commands::pipeline_command(config),
        Command::Quotient => commands::quotient(config),
        Command::Identities => commands::identities(config),
        Command::Norms => commands::norms(config),
    }
    .with_context(|| format!("command {} failed", config.command))?;
    let mut echo = config.clone();
    if let serde_json::Value::Object(map) = out.parameters {
        echo.parameters = map;
    }
    let report = RunReport {
        config_echo: echo,
        results: out.results,
        checks: out.checks,
        wall_time: start.elapsed().as_secs_f64(),
    };
    Ok(JobOutput { report, profile: out.profile })
}

/// Runs jobs on at most `workers` threads; results keep the input order.
pub fn run_batch(jobs: &[JobConfig], workers: usize) -> Result<Vec<Result<JobOutput>>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .context("starting the worker pool")?;
    Ok(pool.install(|| jobs.par_iter().map(run).collect()))
}
