//! Run reports, checks and profile tables.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::JobConfig;

/// How `computed` is compared with `target`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    /// `|computed − target| ≤ tolerance`.
    Absolute,
    /// `|computed − target| ≤ tolerance·|target|`.
    Relative,
    /// `computed < target − tolerance`.
    Below,
    /// `computed ≤ target + tolerance`.
    AtMost,
    /// `computed > target + tolerance`.
    Above,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub computed: f64,
    pub target: f64,
    pub tolerance: f64,
    pub comparison: Comparison,
    pub pass: bool,
    /// Where the target comes from: an exact value, an independent oracle, or a theorem-level bound.
    pub provenance: String,
}

impl Check {
    pub fn new(
        name: impl Into<String>,
        computed: f64,
        target: f64,
        tolerance: f64,
        comparison: Comparison,
        provenance: impl Into<String>,
    ) -> Self {
        let pass = computed.is_finite()
            && match comparison {
                Comparison::Absolute => (computed - target).abs() <= tolerance,
                Comparison::Relative => (computed - target).abs() <= tolerance * target.abs(),
                Comparison::Below => computed < target - tolerance,
                Comparison::AtMost => computed <= target + tolerance,
                Comparison::Above => computed > target + tolerance,
            };
        Self {
            name: name.into(),
            computed,
            target,
            tolerance,
            comparison,
            pass,
            provenance: provenance.into(),
        }
    }

    pub fn absolute(name: impl Into<String>, computed: f64, target: f64, tol: f64, prov: impl Into<String>) -> Self {
        Self::new(name, computed, target, tol, Comparison::Absolute, prov)
    }

    pub fn relative(name: impl Into<String>, computed: f64, target: f64, tol: f64, prov: impl Into<String>) -> Self {
        Self::new(name, computed, target, tol, Comparison::Relative, prov)
    }

    /// `computed ≤ bound`.
    pub fn at_most(name: impl Into<String>, computed: f64, bound: f64, prov: impl Into<String>) -> Self {
        Self::new(name, computed, bound, 0.0, Comparison::AtMost, prov)
    }

    /// `computed > bound + margin`.
    pub fn above(name: impl Into<String>, computed: f64, bound: f64, margin: f64, prov: impl Into<String>) -> Self {
        Self::new(name, computed, bound, margin, Comparison::Above, prov)
    }

    /// `computed < bound − margin`.
    pub fn below(name: impl Into<String>, computed: f64, bound: f64, margin: f64, prov: impl Into<String>) -> Self {
        Self::new(name, computed, bound, margin, Comparison::Below, prov)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    /// The job as run, with every parameter default filled in.
    pub config_echo: JobConfig,
    pub results: Value,
    pub checks: Vec<Check>,
    /// Seconds; excluded from determinism comparisons.
    pub wall_time: f64,
}

impl RunReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    /// The report with `wall_time` zeroed, for byte comparisons.
    pub fn without_timing(&self) -> Self {
        Self { wall_time: 0.0, ..self.clone() }
    }
}

/// Column-oriented table of radial profiles, one row per grid node.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    pub headers: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl Profile {
    pub fn new(headers: &[&str], columns: Vec<Vec<f64>>) -> Self {
        assert_eq!(headers.len(), columns.len(), "one header per column");
        assert!(columns.windows(2).all(|w| w[0].len() == w[1].len()), "columns of equal length");
        Self { headers: headers.iter().map(|h| h.to_string()).collect(), columns }
    }

    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }
}

#[derive(Debug, Clone)]
pub struct JobOutput {
    pub report: RunReport,
    pub profile: Option<Profile>,
}
