//! JSON report envelope shared by every subcommand.
//!
//! Reports are fully deterministic: no timestamps or durations, maps sorted,
//! and every input file identified by its SHA-256 digest.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

#[derive(Serialize)]
pub struct Report {
    pub command: String,
    pub version: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub config: Value,
    pub inputs: BTreeMap<String, String>,
    pub results: Value,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Report {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed: None,
            config: Value::Null,
            inputs: BTreeMap::new(),
            results: Value::Null,
        }
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn config(mut self, config: impl Serialize) -> Result<Self> {
        self.config = serde_json::to_value(config)?;
        Ok(self)
    }

    pub fn input(mut self, path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let digest = sha256_file(path)?;
        self.inputs
            .insert(path.display().to_string(), format!("sha256:{digest}"));
        Ok(self)
    }

    pub fn results(mut self, results: impl Serialize) -> Result<Self> {
        self.results = serde_json::to_value(results)?;
        Ok(self)
    }

    /// Print the JSON report to stdout and optionally write it to a file.
    pub fn emit(&self, out: Option<&Path>) -> Result<()> {
        let json = serde_json::to_string_pretty(self)?;
        println!("{json}");
        if let Some(path) = out {
            fs::write(path, format!("{json}\n"))
                .with_context(|| format!("writing report to {}", path.display()))?;
        }
        Ok(())
    }
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).with_context(|| format!("hashing input {}", path.display()))?;
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    Ok(format!("{:x}", hasher.finalize()))
}

/// Render a small two-column table for humans.
pub fn print_table(title: &str, rows: &[(String, String)]) {
    println!("{title}");
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    for (k, v) in rows {
        println!("  {k:<width$}  {v}");
    }
}
