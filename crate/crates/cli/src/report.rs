//! Campaign reports: a machine-readable JSON document (byte-deterministic for
//! a fixed config), an aligned plain-text summary table, an optional CSV
//! slack stream, and witness files for failures. All files are written
//! atomically via a rename.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::{CampaignConfig, CheckKind};
use crate::witness::Witness;
use crate::CliError;

/// One failed metric of one instance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FailureRecord {
    pub instance_id: String,
    pub metric: String,
    pub slack: f64,
    pub scale: f64,
    pub normalized: f64,
    /// Relative path of the serialized witness, when one was written.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

/// Per-check statistics. The min/mean/max track the check's headline slack
/// (the first metric of each instance), normalized.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckSummary {
    pub count: usize,
    pub excluded: usize,
    pub flagged: usize,
    pub tol: f64,
    pub min_normalized: Option<f64>,
    pub mean_normalized: Option<f64>,
    pub max_normalized: Option<f64>,
    pub failures: Vec<FailureRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub flagged_ids: Vec<String>,
}

impl CheckSummary {
    pub fn empty(tol: f64) -> Self {
        Self {
            count: 0,
            excluded: 0,
            flagged: 0,
            tol,
            min_normalized: None,
            mean_normalized: None,
            max_normalized: None,
            failures: Vec::new(),
            flagged_ids: Vec::new(),
        }
    }

    /// Fraction of attempted instances that were excluded.
    pub fn exclusion_rate(&self) -> f64 {
        let attempted = self.count + self.excluded;
        if attempted == 0 {
            0.0
        } else {
            self.excluded as f64 / attempted as f64
        }
    }
}

/// The full campaign result. Contains the resolved config as its environment
/// fingerprint, so two runs with the same config produce identical bytes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CampaignReport {
    pub version: String,
    pub seed: u64,
    pub config: CampaignConfig,
    pub checks: BTreeMap<CheckKind, CheckSummary>,
    pub total_failures: usize,
}

impl CampaignReport {
    pub fn passed(&self) -> bool {
        self.total_failures == 0
    }

    pub fn to_json_bytes(&self) -> Vec<u8> {
        let mut bytes = serde_json::to_vec_pretty(self).expect("report serializes");
        bytes.push(b'\n');
        bytes
    }

    /// Aligned human-readable summary.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "campaign seed {} (version {}), {} check(s)",
            self.seed,
            self.version,
            self.checks.len()
        );
        let _ = writeln!(
            out,
            "{:<16} {:>9} {:>8} {:>7} {:>12} {:>12} {:>12} {:>9}",
            "check", "count", "excluded", "flagged", "min_norm", "mean_norm", "max_norm", "failures"
        );
        for (kind, s) in &self.checks {
            let fmt = |v: Option<f64>| match v {
                Some(x) => format!("{x:.3e}"),
                None => "-".to_string(),
            };
            let _ = writeln!(
                out,
                "{:<16} {:>9} {:>8} {:>7} {:>12} {:>12} {:>12} {:>9}",
                kind.name(),
                s.count,
                s.excluded,
                s.flagged,
                fmt(s.min_normalized),
                fmt(s.mean_normalized),
                fmt(s.max_normalized),
                s.failures.len()
            );
        }
        for (kind, s) in &self.checks {
            if s.exclusion_rate() >= 0.05 {
                let _ = writeln!(
                    out,
                    "WARNING: {} excluded {} of {} instances ({:.1}% >= 5%); \
                     the sweep may be biased away from near-boundary instances",
                    kind.name(),
                    s.excluded,
                    s.count + s.excluded,
                    100.0 * s.exclusion_rate()
                );
            }
        }
        let _ = writeln!(
            out,
            "total failures: {} -> {}",
            self.total_failures,
            if self.passed() { "PASS" } else { "FAIL" }
        );
        for (kind, s) in &self.checks {
            for f in &s.failures {
                let _ = writeln!(
                    out,
                    "  FAIL {} [{}] {}: normalized slack {:.3e}{}",
                    kind.name(),
                    f.metric,
                    f.instance_id,
                    f.normalized,
                    f.witness
                        .as_deref()
                        .map(|w| format!(" (witness: {w})"))
                        .unwrap_or_default()
                );
            }
        }
        out
    }
}

/// One row of the CSV slack stream.
#[derive(Debug, Clone)]
pub struct CsvRow {
    pub instance_id: String,
    pub check: String,
    pub slack: f64,
    pub scale: f64,
    pub normalized: f64,
}

pub fn csv_bytes(rows: &[CsvRow]) -> Vec<u8> {
    let mut out = String::from("instance_id,check,slack,scale,normalized\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{:e},{:e},{:e}",
            r.instance_id, r.check, r.slack, r.scale, r.normalized
        );
    }
    out.into_bytes()
}

/// Write bytes atomically: a temp file in the target directory, then rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    };
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(io)?;
        }
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    {
        let mut f = fs::File::create(&tmp).map_err(io)?;
        f.write_all(bytes).map_err(io)?;
        f.sync_all().map_err(io)?;
    }
    fs::rename(&tmp, path).map_err(io)?;
    Ok(())
}


/// Serialize a witness under the configured witness directory; returns the
/// path written, for the failure record.
pub fn write_witness(
    cfg: &CampaignConfig,
    kind: CheckKind,
    instance_id: &str,
    witness: &Witness,
) -> Result<String, CliError> {
    let sanitized: String = instance_id
        .chars()
        .map(|c| if c == '/' { '-' } else { c })
        .collect();
    let file = format!("{sanitized}-{}.json", witness.metric);
    let path = cfg.witness_dir.join(kind.name()).join(file);
    let mut bytes = serde_json::to_vec_pretty(witness).map_err(|e| CliError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    bytes.push(b'\n');
    write_atomic(&path, &bytes)?;
    Ok(path.display().to_string())
}
