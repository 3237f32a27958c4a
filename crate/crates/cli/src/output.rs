use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::config::{Format, RunConfig, SCHEMA_VERSION};
use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_owned())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(v) if v.is_finite() => serde_json::to_string(v).expect("finite float"),
            Cell::Num(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

/// A command's result: column table plus header metadata.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub units: Map<String, Value>,
    pub summary: Map<String, Value>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self { columns: columns.into_iter().map(Into::into).collect(), ..Self::default() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn unit(&mut self, column: &str, label: &str) {
        self.units.insert(column.to_owned(), Value::from(label));
    }

    pub fn note(&mut self, key: &str, value: Value) {
        self.summary.insert(key.to_owned(), value);
    }
}

pub fn header(config: &RunConfig, table: &Table) -> Value {
    let mut h = json!({
        "schema": SCHEMA_VERSION,
        "tool": "shardprice",
        "version": env!("CARGO_PKG_VERSION"),
        "config": config,
    });
    if !table.units.is_empty() {
        h["units"] = Value::Object(table.units.clone());
    }
    if !table.summary.is_empty() {
        h["summary"] = Value::Object(table.summary.clone());
    }
    h
}

pub fn render(config: &RunConfig, table: &Table) -> String {
    let header = header(config, table);
    match config.format {
        Format::Csv => {
            let mut out = format!("# {header}\n{}\n", table.columns.join(","));
            for row in &table.rows {
                let line: Vec<String> = row.iter().map(Cell::csv).collect();
                out.push_str(&line.join(","));
                out.push('\n');
            }
            out
        }
        Format::Json => {
            let doc = json!({
                "header": header,
                "columns": table.columns,
                "rows": table.rows,
            });
            let mut s = serde_json::to_string_pretty(&doc).expect("table serializes");
            s.push('\n');
            s
        }
    }
}

pub fn emit(text: &str, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Io(format!("stdout: {e}"))),
    }
}

/// Recovers the embedded config from a CSV or JSON output file.
pub fn read_config(path: &PathBuf) -> Result<RunConfig, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let header: Value = if let Some(rest) = text.strip_prefix('#') {
        let line = rest.lines().next().unwrap_or_default();
        serde_json::from_str(line.trim())
            .map_err(|e| CliError::param(format!("malformed CSV header: {e}")))?
    } else {
        let doc: Value = serde_json::from_str(&text)
            .map_err(|e| CliError::param(format!("not a CSV or JSON output: {e}")))?;
        doc.get("header").cloned().unwrap_or(Value::Null)
    };
    match header.get("schema").and_then(Value::as_u64) {
        Some(v) if v == SCHEMA_VERSION as u64 => {}
        other => {
            return Err(CliError::param(format!("unsupported output schema {other:?}")));
        }
    }
    let config = header
        .get("config")
        .cloned()
        .ok_or_else(|| CliError::param("header carries no config"))?;
    serde_json::from_value(config).map_err(|e| CliError::param(format!("bad config: {e}")))
}
