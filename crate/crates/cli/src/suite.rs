//! The acceptance suite: named experiments grouped into pass/fail criteria.

use std::collections::BTreeMap;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;

use ale_core::poisson::RightHandSide;

use crate::config::{Command, JobConfig};
use crate::report::{Check, RunReport};
use crate::{output, run_batch};

/// One criterion: the listed checks of the listed jobs must all pass.
#[derive(Debug, Clone)]
pub struct Criterion {
    pub id: u8,
    pub title: &'static str,
    pub parts: Vec<(JobConfig, Vec<String>)>,
}

fn calabi(m: usize) -> JobConfig {
    JobConfig::new(Command::Calabi).named(format!("calabi-m{m}")).with("m", m)
}

fn pipeline(m: usize, radius: f64, steps: usize) -> JobConfig {
    JobConfig::new(Command::Pipeline)
        .named(format!("pipeline-m{m}"))
        .with("m", m)
        .with("R", radius)
        .with("steps", steps)
}

fn identities() -> JobConfig {
    JobConfig::new(Command::Identities).named("identities")
}

fn names(list: &[&str]) -> Vec<String> {
    list.iter().map(|s| s.to_string()).collect()
}

const RICCI: &[&str] = &["ricci_flat_closed_form", "ricci_flat_finite_difference"];
const DECAY: &[&str] = &[
    "metric_decay_k0",
    "metric_decay_k1",
    "metric_decay_k2",
    "remainder_decay_k0",
    "remainder_decay_k1",
    "remainder_rate_k0",
    "remainder_rate_k1",
];

pub fn criteria() -> Vec<Criterion> {
    let poisson_oracle = JobConfig::new(Command::Poisson)
        .named("poisson-oracle")
        .with("n", 4)
        .with("rhs", RightHandSide::InverseQuadraticPower { p: 3.0, amplitude: 8.0 })
        .with_grid(1e-6, 1e8, 4000);
    let mut case_a = JobConfig::new(Command::Poisson)
        .named("poisson-case-a")
        .with("n", 4)
        .with("rhs", RightHandSide::InverseQuadraticPower { p: 1.5, amplitude: 1.0 })
        .with_grid(1e-6, 1e12, 3000);
    case_a.tolerances.fit = 0.02;
    let zero_mean_power = JobConfig::new(Command::Poisson)
        .named("poisson-zero-integral")
        .with("n", 4)
        .with("rhs", RightHandSide::RhoPowerLaplacian { p: -3.0 })
        .with_grid(1e-6, 1e12, 3000);
    let zero_mean_bump = JobConfig::new(Command::Poisson)
        .named("poisson-zero-mean-bump")
        .with("n", 4)
        .with("rhs", RightHandSide::ZeroMeanBump { radius: 2.0 })
        .with_grid(1e-6, 1e12, 3000);
    let pipeline_main = pipeline(2, 10.0, 8);
    let pipeline_m3 = pipeline(3, 6.0, 4).with_grid(1e-3, 1e8, 2000);
    let a_sign = names(&["a_negative"]);

    vec![
        Criterion {
            id: 1,
            title: "Calabi potential is Ricci-flat (closed form and finite differences)",
            parts: (2..=5).map(|m| (calabi(m), names(RICCI))).collect(),
        },
        Criterion {
            id: 2,
            title: "Asymptotic coefficient -1/(m(m-1)) and A < 0 in every pipeline run",
            parts: (2..=4)
                .map(|m| (calabi(m), names(&["asymptotic_coefficient"])))
                .chain([(pipeline_main.clone(), a_sign.clone()), (pipeline_m3, a_sign)])
                .collect(),
        },
        Criterion {
            id: 3,
            title: "Sharp decay of the metric deviation and decay of the remainder",
            parts: (2..=3).map(|m| (calabi(m), names(DECAY))).collect(),
        },
        Criterion {
            id: 4,
            title: "Poisson oracle u = (1+r^2)^-1 with A = 1",
            parts: vec![(poisson_oracle, names(&["closed_form_sup_error", "a_exact", "a_quadrature"]))],
        },
        Criterion {
            id: 5,
            title: "Integral of the Laplacian of rho^(2-n)",
            parts: vec![(
                identities(),
                names(&["delta_radius_identity_n4_g1", "delta_radius_identity_n4_g2", "delta_radius_identity_n6_g1"]),
            )],
        },
        Criterion {
            id: 6,
            title: "Weight dichotomy for the flat Laplacian",
            parts: vec![
                (case_a, names(&["decay_u"])),
                (zero_mean_power, names(&["decay_faster_than_green"])),
                (zero_mean_bump, names(&["decay_faster_than_green"])),
            ],
        },
        Criterion {
            id: 7,
            title: "Pointwise Kähler identities on random Hermitian forms",
            parts: vec![(
                identities(),
                (2..=5)
                    .flat_map(|m| [format!("trace_identity_m{m}"), format!("primitive_square_identity_m{m}")])
                    .collect(),
            )],
        },
        Criterion {
            id: 8,
            title: "Gluing pipeline recovers the Calabi metric",
            parts: vec![(
                pipeline_main,
                names(&[
                    "metric_deviation",
                    "newton_quadratic_constant",
                    "solver_agreement",
                    "ricci_potential",
                    "a_total",
                    "coefficient_formula",
                ]),
            )],
        },
        Criterion {
            id: 9,
            title: "Free symplectic cyclic quotients are terminal (k <= 20)",
            parts: [4usize, 6]
                .into_iter()
                .map(|m| {
                    let job = JobConfig::new(Command::Quotient)
                        .named(format!("quotient-scan-m{m}"))
                        .with("m", m)
                        .with("k_max", 20);
                    (job, names(&["terminal_scan"]))
                })
                .collect(),
        },
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectedCheck {
    pub job: String,
    #[serde(flatten)]
    pub check: Check,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionOutcome {
    pub id: u8,
    pub title: String,
    pub pass: bool,
    pub checks: Vec<SelectedCheck>,
    /// Errors from jobs that did not produce a report, or checks that were not found.
    pub errors: Vec<String>,
}

/// Report fields that take part in determinism comparisons.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JobSummary {
    pub name: String,
    pub config_echo: crate::config::JobConfig,
    pub results: Value,
    pub checks: Vec<Check>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteSummary {
    pub criteria: Vec<CriterionOutcome>,
    pub jobs: Vec<JobSummary>,
}

impl SuiteSummary {
    pub fn passed(&self) -> bool {
        self.criteria.iter().all(|c| c.pass)
    }
}

/// Runs every distinct job once and evaluates criteria 1–9.
pub fn evaluate(workers: usize) -> Result<(SuiteSummary, Vec<(String, RunReport)>)> {
    let criteria = criteria();
    let mut unique: Vec<JobConfig> = Vec::new();
    for c in &criteria {
        for (job, _) in &c.parts {
            if !unique.contains(job) {
                unique.push(job.clone());
            }
        }
    }
    let outputs = run_batch(&unique, workers)?;
    let mut by_name: BTreeMap<String, std::result::Result<RunReport, String>> = BTreeMap::new();
    let mut reports = Vec::new();
    let mut jobs = Vec::new();
    for (job, out) in unique.iter().zip(outputs) {
        let name = job.stem();
        match out {
            Ok(o) => {
                jobs.push(JobSummary {
                    name: name.clone(),
                    config_echo: o.report.config_echo.clone(),
                    results: o.report.results.clone(),
                    checks: o.report.checks.clone(),
                });
                reports.push((name.clone(), o.report.clone()));
                by_name.insert(name, Ok(o.report));
            }
            Err(e) => {
                by_name.insert(name, Err(format!("{e:#}")));
            }
        }
    }

    let mut outcomes = Vec::new();
    for c in &criteria {
        let mut checks = Vec::new();
        let mut errors = Vec::new();
        for (job, names) in &c.parts {
            let stem = job.stem();
            match &by_name[&stem] {
                Ok(report) => {
                    for name in names {
                        match report.checks.iter().find(|k| k.name == *name) {
                            Some(k) => checks.push(SelectedCheck { job: stem.clone(), check: k.clone() }),
                            None => errors.push(format!("{stem}: no check named {name}")),
                        }
                    }
                }
                Err(e) => errors.push(format!("{stem}: {e}")),
            }
        }
        let pass = errors.is_empty() && checks.iter().all(|k| k.check.pass);
        outcomes.push(CriterionOutcome { id: c.id, title: c.title.to_owned(), pass, checks, errors });
    }
    Ok((SuiteSummary { criteria: outcomes, jobs }, reports))
}

pub struct SuiteRun {
    pub summary: SuiteSummary,
    /// The serialized summary written to `check_summary.json`.
    pub summary_json: String,
    pub reports: Vec<(String, RunReport)>,
}

/// Full suite: criteria 1–9, then criterion 10 by repeating the run and comparing bytes.
pub fn run_suite(workers: usize) -> Result<SuiteRun> {
    let (mut first, reports) = evaluate(workers)?;
    let (second, _) = evaluate(workers)?;
    let a = output::to_json(&first)?;
    let b = output::to_json(&second)?;
    let differing = a.bytes().zip(b.bytes()).filter(|(x, y)| x != y).count() + a.len().abs_diff(b.len());
    let check = Check::absolute(
        "byte_identical_summaries",
        differing as f64,
        0.0,
        0.0,
        "repeated run of criteria 1-9",
    );
    first.criteria.push(CriterionOutcome {
        id: 10,
        title: "Repeated runs give byte-identical JSON summaries".to_owned(),
        pass: check.pass,
        checks: vec![SelectedCheck { job: "suite".to_owned(), check }],
        errors: Vec::new(),
    });
    let summary_json = output::to_json(&first).context("serializing the suite summary")?;
    Ok(SuiteRun { summary: first, summary_json, reports })
}

/// `criterion N: PASS|FAIL  title` plus indented failing checks.
pub fn format_outcome(c: &CriterionOutcome) -> String {
    let mut s = format!("criterion {:>2}: {}  {}", c.id, if c.pass { "PASS" } else { "FAIL" }, c.title);
    for k in c.checks.iter().filter(|k| !k.check.pass) {
        s.push_str(&format!(
            "\n    {}/{}: computed {:e}, target {:e}, tolerance {:e}",
            k.job, k.check.name, k.check.computed, k.check.target, k.check.tolerance
        ));
    }
    for e in &c.errors {
        s.push_str(&format!("\n    error: {e}"));
    }
    s
}
