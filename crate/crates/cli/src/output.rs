//! Report envelopes and their JSON / CSV renderings.

use serde::Serialize;
use serde_json::Value;

use qdelab_core::{Error, Result};

use crate::config::{Config, Format};

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

/// What a subcommand produced. `failure` is set when a checked identity
/// did not hold; the report is still written.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub result: Value,
    pub table: Table,
    pub failure: Option<String>,
}

impl Outcome {
    pub fn new(result: impl Serialize, table: Table) -> Result<Self> {
        let result = serde_json::to_value(result).map_err(|e| Error::invalid(e.to_string()))?;
        Ok(Outcome { result, table, failure: None })
    }

    pub fn failing(mut self, failure: Option<String>) -> Self {
        self.failure = failure;
        self
    }
}

#[derive(Serialize)]
struct Envelope<'a> {
    command: &'a str,
    config: &'a Config,
    status: &'a str,
    result: &'a Value,
}

pub fn render(command: &str, config: &Config, out: &Outcome) -> Result<String> {
    let status = if out.failure.is_some() { "fail" } else { "pass" };
    match config.format {
        Format::Json => {
            let env = Envelope { command, config, status, result: &out.result };
            let mut s = serde_json::to_string_pretty(&env).map_err(|e| Error::invalid(e.to_string()))?;
            s.push('\n');
            Ok(s)
        }
        Format::Csv => {
            let cfg = serde_json::to_string(config).map_err(|e| Error::invalid(e.to_string()))?;
            let mut s = format!("# qdelab {command} {status}\n# config {cfg}\n");
            let mut w = csv::Writer::from_writer(Vec::new());
            let csv_err = |e: csv::Error| Error::invalid(e.to_string());
            w.write_record(&out.table.header).map_err(csv_err)?;
            for row in &out.table.rows {
                w.write_record(row).map_err(csv_err)?;
            }
            let bytes = w.into_inner().map_err(|e| Error::invalid(e.to_string()))?;
            s.push_str(&String::from_utf8(bytes).map_err(|e| Error::invalid(e.to_string()))?);
            Ok(s)
        }
    }
}
