//! Deterministic CSV and JSON emission.

use std::fs;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

/// Shortest decimal that parses back to the same `f64`; empty for missing
/// values.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{}", v)
    }
}

pub fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

/// Header plus already-formatted rows.
#[derive(Debug, Clone, Default)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(&self.header).expect("writing to memory");
        for r in &self.rows {
            w.write_record(r).expect("writing to memory");
        }
        w.into_inner().expect("flushing to memory")
    }
}

/// Daily series as `date,value,unit` rows.
pub fn daily_table(dates: &[NaiveDate], values: &[u64], units: &[String]) -> CsvTable {
    let mut t = CsvTable::new(&["date", "value", "unit"]);
    for ((d, v), u) in dates.iter().zip(values).zip(units) {
        t.push(vec![d.format("%Y-%m-%d").to_string(), v.to_string(), u.clone()]);
    }
    t
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn sha256_file(path: &Path) -> CliResult<String> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    Ok(sha256_hex(&bytes))
}

/// Name and digest of one written file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, serde::Deserialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

/// Writes files next to each other under a common prefix and records them.
#[derive(Debug)]
pub struct OutputSet {
    prefix: PathBuf,
    written: Vec<FileDigest>,
}

impl OutputSet {
    pub fn new(prefix: &Path) -> CliResult<Self> {
        if let Some(dir) = prefix.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        }
        Ok(Self {
            prefix: prefix.to_path_buf(),
            written: Vec::new(),
        })
    }

    /// `<prefix>.<suffix>`
    pub fn path(&self, suffix: &str) -> PathBuf {
        let mut s = self.prefix.as_os_str().to_owned();
        s.push(".");
        s.push(suffix);
        PathBuf::from(s)
    }

    pub fn write_bytes(&mut self, suffix: &str, bytes: &[u8]) -> CliResult<PathBuf> {
        let path = self.path(suffix);
        fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
        // manifests list outputs by file name so the prefix directory can move
        let name = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        self.written.push(FileDigest {
            path: name,
            sha256: sha256_hex(bytes),
        });
        Ok(path)
    }

    pub fn write_csv(&mut self, suffix: &str, table: &CsvTable) -> CliResult<PathBuf> {
        self.write_bytes(suffix, &table.to_bytes())
    }

    pub fn write_json<T: Serialize>(&mut self, suffix: &str, value: &T) -> CliResult<PathBuf> {
        let mut bytes = serde_json::to_vec_pretty(value)
            .map_err(|e| CliError::Numerical(format!("serializing {}: {}", suffix, e)))?;
        bytes.push(b'\n');
        self.write_bytes(suffix, &bytes)
    }

    pub fn written(&self) -> &[FileDigest] {
        &self.written
    }

    pub fn paths(&self) -> Vec<PathBuf> {
        let dir = self.prefix.parent().unwrap_or(Path::new(""));
        self.written.iter().map(|f| dir.join(&f.path)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for v in [0.1, 1.0 / 3.0, 12.227488151658768, -2.5e-9, 1e21, 0.0, 513510.0] {
            let s = fmt_f64(v);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits(), "{}", s);
        }
        assert_eq!(fmt_f64(2.0), "2");
        assert_eq!(fmt_opt(None), "");
    }

    proptest::proptest! {
        #[test]
        fn any_finite_float_round_trips(bits in proptest::num::u64::ANY) {
            let v = f64::from_bits(bits);
            if v.is_finite() {
                proptest::prop_assert_eq!(fmt_f64(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
            }
        }
    }

    #[test]
    fn csv_bytes_are_stable() {
        let mut t = CsvTable::new(&["a", "b"]);
        t.push(vec!["1".into(), "x,y".into()]);
        assert_eq!(t.to_bytes(), b"a,b\n1,\"x,y\"\n");
    }

    #[test]
    fn digest_of_empty_input() {
        assert_eq!(
            sha256_hex(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }
}
