//! Batch front end for the trace-inequality verification kernel: campaign
//! configuration, the seeded campaign engine, report/witness serialization,
//! and witness replay. The binary in `main.rs` wires these to subcommands.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use thiserror::Error;

pub mod campaign;
pub mod config;
pub mod report;
pub mod witness;

pub use campaign::run_campaign;
pub use config::{CampaignConfig, CheckKind, MapFamily, PartialConfig};
pub use report::{CampaignReport, CheckSummary, CsvRow, FailureRecord};
pub use witness::{replay, ReplayOutcome, Witness, WitnessInputs};

/// Errors surfaced by the front end. The exit-code contract is
/// 0 = all checks passed, 1 = inequality failure(s) or non-convergence,
/// 2 = configuration, parse, or I/O problems.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("I/O error on {path}: {message}")]
    Io { path: String, message: String },

    #[error("parse error in {path} at line {line}, column {column} (byte {offset}): {message}")]
    Parse {
        path: String,
        line: usize,
        column: usize,
        offset: usize,
        message: String,
    },

    #[error("check evaluation failed: {0}")]
    Check(String),

    #[error("{count} check failure(s)")]
    Failures { count: usize },

    #[error("mirror ascent did not converge: final gap {gap:.3e}")]
    NonConvergence { gap: f64 },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Failures { .. } | CliError::NonConvergence { .. } => 1,
            _ => 2,
        }
    }
}

/// Load and deserialize a JSON file, reporting parse failures with line,
/// column, and byte offset.
pub fn load_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    serde_json::from_str(&text).map_err(|e| parse_error(path, &text, &e))
}

fn parse_error(path: &Path, text: &str, e: &serde_json::Error) -> CliError {
    let (line, column) = (e.line().max(1), e.column().max(1));
    let offset = text
        .split_inclusive('\n')
        .take(line - 1)
        .map(str::len)
        .sum::<usize>()
        + (column - 1);
    CliError::Parse {
        path: path.display().to_string(),
        line,
        column,
        offset,
        message: e.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_errors_carry_byte_offsets() {
        let dir = std::env::temp_dir().join("traceineq-parse-test");
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("bad.json");
        fs::write(&path, "{\n  \"dim\": 2,\n  entries: []\n}\n").unwrap();
        let err = load_json::<serde_json::Value>(&path).unwrap_err();
        match err {
            CliError::Parse { line, column, offset, .. } => {
                assert_eq!(line, 3);
                assert!(column >= 3);
                // Line 3 starts at byte 14 ("{\n" plus "  \"dim\": 2,\n").
                assert_eq!(offset, 14 + (column - 1));
            }
            other => panic!("expected parse error, got {other}"),
        }
    }
}
