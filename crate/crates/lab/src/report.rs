//! Report files: a deterministic `<command>.json` payload document, a
//! `<command>.meta.json` sidecar for run-dependent data (timestamps, timing,
//! cache use) and any CSV or raster artifacts.

use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::error::{LabError, LabResult};

pub const SCHEMA: &str = "v1";

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Provenance {
    pub precision_bits: u32,
    /// Resolved numerical settings, defaults included.
    pub settings: Value,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub command: String,
    /// The configuration the command ran with.
    pub inputs: Value,
    pub provenance: Provenance,
    pub payload: Value,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Meta {
    pub command: String,
    pub unix_time: u64,
    pub elapsed_ms: u128,
    pub cache: Option<&'static str>,
    pub exit_code: i32,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub body: String,
}

fn write(path: &Path, body: &str) -> LabResult<()> {
    std::fs::write(path, body).map_err(|e| LabError::io(path, e))
}

/// Write the report, its metadata and artifacts; returns the report path.
pub fn write_all(out: &Path, report: &Report, meta: &Meta, artifacts: &[Artifact]) -> LabResult<PathBuf> {
    std::fs::create_dir_all(out).map_err(|e| LabError::io(out, e))?;
    let path = out.join(format!("{}.json", report.command));
    let mut body = serde_json::to_string_pretty(report).expect("reports serialize");
    body.push('\n');
    write(&path, &body)?;
    let mut meta_body = serde_json::to_string_pretty(meta).expect("metadata serializes");
    meta_body.push('\n');
    write(&out.join(format!("{}.meta.json", report.command)), &meta_body)?;
    for a in artifacts {
        write(&out.join(&a.name), &a.body)?;
    }
    Ok(path)
}
