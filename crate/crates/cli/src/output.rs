use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::error::CliError;

/// Column-oriented result with a fixed schema.
#[derive(Debug, Clone)]
pub struct ResultTable {
    pub name: String,
    pub columns: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl ResultTable {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    /// Appends a row; panics if the arity differs from the schema, which is
    /// a programming error rather than a data problem.
    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.columns.len(), "row arity must match the schema of {}", self.name);
        self.rows.push(row);
    }

    pub fn rows(&self) -> &[Vec<String>] {
        &self.rows
    }

    pub fn file_name(&self) -> String {
        format!("{}.csv", self.name)
    }
}

/// Shortest representation that parses back to the same `f64`.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

/// Everything an experiment produces besides timing.
#[derive(Debug, Default)]
pub struct Outcome {
    pub tables: Vec<ResultTable>,
    pub summary: Map<String, Value>,
    pub warnings: Vec<String>,
}

pub fn config_hash(canonical: &str) -> String {
    Sha256::digest(canonical.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

pub struct RunRecord<'a> {
    pub experiment: &'a str,
    pub canonical_config: &'a str,
    pub seed: u64,
    pub wall_time_s: f64,
}

/// Writes each table as CSV plus one JSON sidecar `<experiment>.json`.
/// Returns the paths written.
pub fn write_outputs(dir: &Path, record: &RunRecord<'_>, outcome: &Outcome) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(dir).map_err(|source| CliError::Write { path: dir.to_path_buf(), source })?;
    let mut written = Vec::new();
    for table in &outcome.tables {
        let path = dir.join(table.file_name());
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(&table.columns)?;
        for row in table.rows() {
            w.write_record(row)?;
        }
        w.flush().map_err(|source| CliError::Write { path: path.clone(), source })?;
        written.push(path);
    }
    let tables: Vec<Value> = outcome
        .tables
        .iter()
        .map(|t| json!({ "file": t.file_name(), "columns": t.columns, "rows": t.rows().len() }))
        .collect();
    let meta = json!({
        "schema_version": crate::config::SCHEMA_VERSION,
        "experiment": record.experiment,
        "config_hash": config_hash(record.canonical_config),
        "config": record.canonical_config,
        "seeds": { "seed": record.seed },
        "versions": {
            "fockchaos": fockchaos::VERSION,
            "fockchaos-cli": env!("CARGO_PKG_VERSION"),
        },
        "wall_time_s": record.wall_time_s,
        "tables": tables,
        "summary": outcome.summary,
        "warnings": outcome.warnings,
    });
    let path = dir.join(format!("{}.json", record.experiment));
    let text = serde_json::to_string_pretty(&meta).expect("metadata is valid JSON");
    fs::write(&path, text + "\n").map_err(|source| CliError::Write { path: path.clone(), source })?;
    written.push(path);
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02e23, 0.0] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn hash_is_sha256_hex() {
        assert_eq!(
            config_hash(""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }

    #[test]
    #[should_panic(expected = "row arity")]
    fn arity_is_enforced() {
        let mut t = ResultTable::new("x", &["a", "b"]);
        t.push(vec!["1".into()]);
    }
}
