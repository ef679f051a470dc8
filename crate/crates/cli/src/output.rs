//! Report and profile files.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

use crate::config::Format;
use crate::report::{JobOutput, Profile};

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// Writes the profile as CSV, every value as `{:.17e}` so that files round-trip exactly.
pub fn write_profile_csv(profile: &Profile, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(&profile.headers)?;
    for i in 0..profile.rows() {
        w.write_record(profile.columns.iter().map(|c| format!("{:.17e}", c[i])))?;
    }
    w.flush().with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// Writes `<stem>.json` and `<stem>.csv` (if a profile exists) as requested by the job.
pub fn emit(output: &JobOutput, dir: &Path, stem: &str) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let formats = &output.report.config_echo.output.formats;
    let mut written = Vec::new();
    if formats.contains(&Format::Json) {
        let path = dir.join(format!("{stem}.json"));
        fs::write(&path, to_json(&output.report)?).with_context(|| format!("writing {}", path.display()))?;
        written.push(path);
    }
    if let (true, Some(profile)) = (formats.contains(&Format::Csv), &output.profile) {
        let path = dir.join(format!("{stem}.csv"));
        write_profile_csv(profile, &path)?;
        written.push(path);
    }
    Ok(written)
}
