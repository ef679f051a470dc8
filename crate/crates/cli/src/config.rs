//! Job configuration files.

use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Calabi,
    Poisson,
    MaSolve,
    Pipeline,
    Quotient,
    Identities,
    Norms,
}

impl Command {
    pub const ALL: [Command; 7] = [
        Command::Calabi,
        Command::Poisson,
        Command::MaSolve,
        Command::Pipeline,
        Command::Quotient,
        Command::Identities,
        Command::Norms,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Calabi => "calabi",
            Command::Poisson => "poisson",
            Command::MaSolve => "ma-solve",
            Command::Pipeline => "pipeline",
            Command::Quotient => "quotient",
            Command::Identities => "identities",
            Command::Norms => "norms",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Sampling of `t = r²`; commands working in `r` use `[√t_min, √t_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub t_min: f64,
    pub t_max: f64,
    pub n_points: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { t_min: 1e-4, t_max: 1e8, n_points: 2000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Sup-norm residual at which Newton iteration stops.
    pub newton: f64,
    /// Relative tolerance of adaptive quadratures run as oracles.
    pub quadrature: f64,
    /// Relative tolerance on fitted decay rates.
    pub fit: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { newton: 1e-10, quadrature: 1e-12, fit: 0.05 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub directory: Option<PathBuf>,
    #[serde(default = "default_formats")]
    pub formats: Vec<Format>,
}

fn default_formats() -> Vec<Format> {
    vec![Format::Json, Format::Csv]
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { directory: None, formats: default_formats() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    /// Stem for output file names; defaults to the command name.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub command: Command,
    #[serde(default)]
    pub parameters: Map<String, Value>,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output: OutputConfig,
}

impl JobConfig {
    pub fn new(command: Command) -> Self {
        Self {
            name: None,
            command,
            parameters: Map::new(),
            grid: GridConfig::default(),
            tolerances: Tolerances::default(),
            output: OutputConfig::default(),
        }
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    /// Sets one parameter; panics only if `value` cannot be represented as JSON.
    pub fn with(mut self, key: &str, value: impl Serialize) -> Self {
        let v = serde_json::to_value(value).expect("parameter serializes to JSON");
        self.parameters.insert(key.to_owned(), v);
        self
    }

    pub fn with_grid(mut self, t_min: f64, t_max: f64, n_points: usize) -> Self {
        self.grid = GridConfig { t_min, t_max, n_points };
        self
    }

    pub fn stem(&self) -> String {
        self.name.clone().unwrap_or_else(|| self.command.name().to_owned())
    }

    pub fn validate(&self) -> Result<()> {
        let g = &self.grid;
        if g.n_points < 16 {
            bail!("grid.n_points must be at least 16, got {}", g.n_points);
        }
        if !(g.t_min > 0.0 && g.t_min < g.t_max && g.t_max.is_finite()) {
            bail!("grid needs 0 < t_min < t_max < inf, got [{}, {}]", g.t_min, g.t_max);
        }
        let t = &self.tolerances;
        for (name, v) in [("newton", t.newton), ("quadrature", t.quadrature), ("fit", t.fit)] {
            if !(v > 0.0 && v.is_finite()) {
                bail!("tolerances.{name} must be positive, got {v}");
            }
        }
        if let Some(name) = &self.name {
            if name.is_empty() || name.contains(['/', '\\']) {
                bail!("name {name:?} is not usable as a file stem");
            }
        }
        Ok(())
    }

    /// Typed view of `parameters`, with defaults for absent keys.
    pub fn parameters<P: DeserializeOwned>(&self) -> Result<P> {
        serde_json::from_value(Value::Object(self.parameters.clone()))
            .with_context(|| format!("malformed parameters for command {}", self.command))
    }
}

/// A config file holds one job object, a list of jobs, or `{"jobs": [...]}`.
#[derive(Deserialize)]
#[serde(untagged)]
enum ConfigFile {
    Batch { jobs: Vec<JobConfig> },
    List(Vec<JobConfig>),
    Single(Box<JobConfig>),
}

pub fn parse_jobs(text: &str) -> Result<Vec<JobConfig>> {
    let value: Value = serde_json::from_str(text).context("config is not valid JSON")?;
    let jobs = match value {
        Value::Object(ref o) if o.contains_key("jobs") && !o.contains_key("command") => {
            serde_json::from_value::<ConfigFile>(value).map(|c| match c {
                ConfigFile::Batch { jobs } => jobs,
                ConfigFile::List(l) => l,
                ConfigFile::Single(j) => vec![*j],
            })
        }
        Value::Array(_) => serde_json::from_value::<Vec<JobConfig>>(value),
        _ => serde_json::from_value::<JobConfig>(value).map(|j| vec![j]),
    }
    .context("malformed job config")?;
    if jobs.is_empty() {
        bail!("config contains no jobs");
    }
    for (i, j) in jobs.iter().enumerate() {
        j.validate().with_context(|| format!("job {i} ({})", j.command))?;
    }
    Ok(jobs)
}

pub fn load_jobs(path: &Path) -> Result<Vec<JobConfig>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_jobs(&text).with_context(|| format!("in {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_fill_missing_sections() {
        let jobs = parse_jobs(r#"{"command": "calabi", "parameters": {"m": 3}}"#).unwrap();
        assert_eq!(jobs.len(), 1);
        assert_eq!(jobs[0].grid, GridConfig::default());
        assert_eq!(jobs[0].output.formats, vec![Format::Json, Format::Csv]);
        assert_eq!(jobs[0].parameters["m"], 3);
    }

    #[test]
    fn batch_forms() {
        let a = parse_jobs(r#"[{"command": "calabi"}, {"command": "norms"}]"#).unwrap();
        let b = parse_jobs(r#"{"jobs": [{"command": "calabi"}, {"command": "norms"}]}"#).unwrap();
        assert_eq!(a, b);
        assert_eq!(a[1].command, Command::Norms);
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(parse_jobs(r#"{"command": "frobnicate"}"#).is_err());
        assert!(parse_jobs(r#"{"command": "calabi", "grid": {"t_min": 1, "t_max": 0.5, "n_points": 100}}"#).is_err());
        assert!(parse_jobs(r#"{"command": "calabi", "grid": {"t_min": 1, "t_max": 5, "n_points": 8}}"#).is_err());
        assert!(parse_jobs(r#"{"command": "calabi", "tolerances": {"newton": 0, "quadrature": 1, "fit": 1}}"#).is_err());
        assert!(parse_jobs(r#"{"command": "calabi", "colour": "red"}"#).is_err());
        assert!(parse_jobs("[]").is_err());
        assert!(parse_jobs("{").is_err());
    }

    #[test]
    fn serialization_round_trips() {
        let j = JobConfig::new(Command::MaSolve).named("bump").with("m", 2).with_grid(1e-3, 1e6, 500);
        let text = serde_json::to_string(&j).unwrap();
        assert_eq!(parse_jobs(&text).unwrap(), vec![j]);
    }
}
