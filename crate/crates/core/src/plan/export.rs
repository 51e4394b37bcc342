use std::fs;
use std::path::{Path, PathBuf};

use super::RunReport;
use crate::error::{Error, Result};
use crate::fock::io::state_to_text;

pub const REPORT_FILE: &str = "report.txt";
pub const METRICS_FILE: &str = "metrics.txt";
pub const PLAN_FILE: &str = "plan.toml";
pub const FINAL_STATE_FILE: &str = "final_state.txt";

/// Writes the report, metrics, plan echo, final state and every measurement
/// artifact into `out_dir` (created if missing). Returns the written paths.
pub fn export_outputs(report: &RunReport, out_dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir)?;
    let mut files = vec![
        (REPORT_FILE.to_string(), report.to_text()),
        (METRICS_FILE.to_string(), report.metrics_text()),
        (PLAN_FILE.to_string(), report.plan_echo.clone()),
        (FINAL_STATE_FILE.to_string(), state_to_text(&report.final_state)),
    ];
    for m in &report.measurements {
        for a in &m.artifacts {
            files.push((a.file.clone(), a.contents.clone()));
        }
    }
    let mut written = Vec::with_capacity(files.len());
    for (name, contents) in files {
        let path = out_dir.join(name);
        fs::write(&path, contents)?;
        written.push(path);
    }
    Ok(written)
}

/// Parses a metrics file (`key = value` per line, `#` comments).
pub fn parse_metrics(text: &str) -> Result<Vec<(String, f64)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Format(format!("line {}: expected 'key = value'", i + 1)))?;
        let value: f64 = v
            .trim()
            .parse()
            .map_err(|_| Error::Format(format!("line {}: '{}' is not a number", i + 1, v.trim())))?;
        out.push((k.trim().to_string(), value));
    }
    Ok(out)
}
