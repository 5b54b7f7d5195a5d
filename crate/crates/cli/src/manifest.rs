//! Run manifests: what was run, on which inputs, producing which files.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::output::{sha256_file, FileDigest};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Source of manifest timestamps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Clock {
    System,
    Fixed(DateTime<Utc>),
}

impl Clock {
    /// Honours `SOURCE_DATE_EPOCH` so that repeated runs can be byte-identical.
    pub fn from_env() -> Self {
        std::env::var("SOURCE_DATE_EPOCH")
            .ok()
            .and_then(|s| s.trim().parse::<i64>().ok())
            .and_then(|secs| DateTime::from_timestamp(secs, 0))
            .map(Clock::Fixed)
            .unwrap_or(Clock::System)
    }

    pub fn now(&self) -> String {
        let t = match self {
            Clock::System => Utc::now(),
            Clock::Fixed(t) => *t,
        };
        t.to_rfc3339_opts(SecondsFormat::Secs, true)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub tool_version: String,
    pub seed: u64,
    /// Inputs as given on the command line.
    pub inputs: Vec<FileDigest>,
    pub config: BTreeMap<String, String>,
    pub started_at: String,
    pub finished_at: String,
    /// Outputs by file name, relative to the manifest's directory.
    pub outputs: Vec<FileDigest>,
}

impl RunManifest {
    pub fn digest_inputs(paths: &[&Path]) -> CliResult<Vec<FileDigest>> {
        paths
            .iter()
            .map(|p| {
                Ok(FileDigest {
                    path: p.display().to_string(),
                    sha256: sha256_file(p)?,
                })
            })
            .collect()
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Validation(format!("{}: invalid manifest: {}", path.display(), e)))
    }
}

/// Re-hashes every input and output listed in the manifest at `path`.
///
/// Returns one message per missing or changed file; empty means intact.
pub fn verify_manifest(path: &Path) -> CliResult<Vec<String>> {
    let m = RunManifest::load(path)?;
    let dir = path.parent().unwrap_or(Path::new(""));
    let mut problems = Vec::new();
    let mut check = |kind: &str, file: &Path, expected: &str| match sha256_file(file) {
        Ok(h) if h == expected => {}
        Ok(h) => problems.push(format!("{} {} changed: expected {}, found {}", kind, file.display(), expected, h)),
        Err(_) => problems.push(format!("{} {} is missing", kind, file.display())),
    };
    for f in &m.inputs {
        check("input", Path::new(&f.path), &f.sha256);
    }
    for f in &m.outputs {
        check("output", &dir.join(&f.path), &f.sha256);
    }
    Ok(problems)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_clock_formats_utc() {
        let c = Clock::Fixed(DateTime::from_timestamp(0, 0).unwrap());
        assert_eq!(c.now(), "1970-01-01T00:00:00Z");
    }
}
