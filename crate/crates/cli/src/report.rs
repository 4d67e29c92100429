//! Run reports and atomic artifact writing.
//!
//! Reports are deliberately free of wall-clock data: the work counter is the
//! number of integrator steps, so identical config + seed reproduces the
//! report byte for byte.

use std::fs;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckRecord {
    pub id: String,
    /// "PASS" | "FAIL" | "NOT-APPLICABLE".
    pub status: String,
    /// The check's headline statistic.
    pub stat: f64,
    pub details: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub preset: String,
    pub seed: u64,
    pub checks: Vec<CheckRecord>,
    /// Deterministic work counter: total explicit integrator steps.
    pub work_steps: u64,
    /// Max |u| seen on the outermost lattice ring (truncation diagnostic).
    pub truncation_max: f64,
    /// Artifact files written alongside the report, relative names.
    pub files: Vec<String>,
    pub config: ExperimentConfig,
}

impl RunReport {
    pub fn new(config: &ExperimentConfig) -> RunReport {
        RunReport {
            schema_version: SCHEMA_VERSION,
            preset: config.preset.clone(),
            seed: config.seed,
            checks: Vec::new(),
            work_steps: 0,
            truncation_max: 0.0,
            files: Vec::new(),
            config: config.clone(),
        }
    }

    pub fn push(&mut self, id: &str, status: movplane_core::CheckStatus, stat: f64, details: String) {
        self.checks.push(CheckRecord {
            id: id.to_string(),
            status: status.to_string(),
            stat,
            details,
        });
    }

    pub fn to_ron(&self) -> String {
        ron::ser::to_string_pretty(self, ron::ser::PrettyConfig::default())
            .expect("report serializes")
    }

    /// 0 all pass, 1 any conclusion failed, 3 hypotheses unmet (and nothing
    /// failed outright).
    pub fn exit_code(&self) -> i32 {
        if self.checks.iter().any(|c| c.status == "FAIL") {
            1
        } else if self.checks.iter().any(|c| c.status == "NOT-APPLICABLE") {
            3
        } else {
            0
        }
    }
}

/// Write-temp-then-rename, so readers never observe a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let tmp = path.with_extension(format!(
        "{}.tmp",
        path.extension().and_then(|e| e.to_str()).unwrap_or("dat")
    ));
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)
}

/// Comma-separated table with a header row.
pub fn write_csv(path: &Path, header: &str, rows: &[Vec<f64>]) -> io::Result<()> {
    let mut text = String::from(header);
    text.push('\n');
    for row in rows {
        let line: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
        text.push_str(&line.join(","));
        text.push('\n');
    }
    write_atomic(path, text.as_bytes())
}
