//! Report envelope and file output.

use std::fs;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

pub fn config_hash(raw: &str) -> String {
    hex::encode(Sha256::digest(raw.as_bytes()))
}

/// Wraps a command result with the provenance every report carries.
pub fn envelope(
    command: &str,
    cfg: &RunConfig,
    raw: &str,
    tolerances: Value,
    result: impl Serialize,
) -> CliResult<Value> {
    let timestamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    Ok(json!({
        "command": command,
        "example": cfg.example,
        "params": cfg.params,
        "config_hash": config_hash(raw),
        "seed": cfg.seed,
        "h": cfg.h,
        "tolerances": tolerances,
        "timestamp": timestamp,
        "result": serde_json::to_value(result)?,
    }))
}

/// A CSV table with a header row and dot-decimal numbers.
pub struct Csv {
    writer: csv::Writer<Vec<u8>>,
}

impl Csv {
    pub fn new(header: &[String]) -> Self {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(header).expect("writing to memory");
        Self { writer }
    }

    pub fn row(&mut self, values: &[f64]) {
        self.writer.serialize(values).expect("writing to memory");
    }

    pub fn into_string(self) -> String {
        let bytes = self.writer.into_inner().expect("flushing to memory");
        String::from_utf8(bytes).expect("csv output is utf-8")
    }
}

/// Collected outputs, written once at the end of a command.
#[derive(Debug, Default)]
pub struct Outputs {
    pub files: Vec<(String, String)>,
}

impl Outputs {
    pub fn add(&mut self, name: impl Into<String>, contents: impl Into<String>) {
        self.files.push((name.into(), contents.into()));
    }

    pub fn write_all(&self, dir: &Path) -> CliResult<()> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir.display().to_string(), e))?;
        for (name, contents) in &self.files {
            let path = dir.join(name);
            fs::write(&path, contents).map_err(|e| CliError::io(path.display().to_string(), e))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_uses_dot_decimals_and_header() {
        let mut c = Csv::new(&["t".into(), "x1".into()]);
        c.row(&[0.5, -2.0]);
        assert_eq!(c.into_string(), "t,x1\n0.5,-2.0\n");
    }

    #[test]
    fn hash_is_stable() {
        assert_eq!(config_hash("abc"), config_hash("abc"));
        assert_ne!(config_hash("abc"), config_hash("abd"));
        assert_eq!(config_hash("").len(), 64);
    }
}
