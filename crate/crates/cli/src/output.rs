//! JSON and CSV rendering. Both renderings are built from the same cell
//! strings, so they always carry identical numbers.

use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use clap::ValueEnum;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Rows of a CSV rendering; the JSON rendering lists them under `rows`.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Table {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn to_json(&self) -> Value {
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let obj: Map<String, Value> = self
                    .columns
                    .iter()
                    .zip(row)
                    .map(|(c, v)| (c.to_string(), cell_json(v)))
                    .collect();
                Value::Object(obj)
            })
            .collect();
        Value::Array(rows)
    }
}

/// Integers and `null` keep their JSON types; everything else stays a string
/// so that rationals are never rounded.
fn cell_json(cell: &str) -> Value {
    if cell.is_empty() {
        return Value::Null;
    }
    if let Ok(n) = cell.parse::<i64>() {
        return Value::from(n);
    }
    match cell {
        "true" => Value::Bool(true),
        "false" => Value::Bool(false),
        _ => match cell.parse::<f64>() {
            Ok(x) if cell.contains('.') || cell.contains('e') => Value::from(x),
            _ => Value::String(cell.to_string()),
        },
    }
}

pub struct Report {
    /// The fully resolved configuration, defaults included.
    pub config: Value,
    /// Summary fields, placed at the top level of the JSON object.
    pub summary: Map<String, Value>,
    pub table: Table,
}

impl Report {
    pub fn new(config: impl Serialize, table: Table) -> Self {
        Report {
            config: serde_json::to_value(config).expect("config serializes"),
            summary: Map::new(),
            table,
        }
    }

    pub fn with(mut self, key: &str, value: impl Serialize) -> Self {
        self.summary.insert(
            key.to_string(),
            serde_json::to_value(value).expect("value serializes"),
        );
        self
    }

    fn to_json(&self) -> Value {
        let mut obj = self.summary.clone();
        obj.insert("config".into(), self.config.clone());
        if !self.table.columns.is_empty() {
            obj.insert("rows".into(), self.table.to_json());
        }
        Value::Object(obj)
    }

    pub fn emit(&self, format: Format, output: Option<&Path>) -> Result<(), CliError> {
        let mut sink: Box<dyn Write> =
            match output {
                Some(path) => Box::new(File::create(path).map_err(|e| {
                    CliError::Usage(format!("cannot create {}: {e}", path.display()))
                })?),
                None => Box::new(io::stdout().lock()),
            };
        let io_err = |e: io::Error| CliError::Io(e.to_string());
        match format {
            Format::Json => {
                serde_json::to_writer_pretty(&mut sink, &self.to_json())
                    .map_err(|e| CliError::Io(e.to_string()))?;
                writeln!(sink).map_err(io_err)?;
            }
            Format::Csv => {
                let mut w = csv::Writer::from_writer(sink);
                let write_err = |e: csv::Error| CliError::Io(e.to_string());
                if self.table.columns.is_empty() {
                    w.write_record(["key", "value"]).map_err(write_err)?;
                    for (k, v) in &self.summary {
                        let v = match v {
                            Value::String(s) => s.clone(),
                            other => other.to_string(),
                        };
                        w.write_record([k.as_str(), v.as_str()])
                            .map_err(write_err)?;
                    }
                } else {
                    w.write_record(&self.table.columns).map_err(write_err)?;
                    for row in &self.table.rows {
                        w.write_record(row).map_err(write_err)?;
                    }
                }
                w.flush().map_err(io_err)?;
            }
        }
        Ok(())
    }
}

/// `Some(x)` as its display string, `None` as an empty cell.
pub fn opt_cell<T: ToString>(x: &Option<T>) -> String {
    x.as_ref().map_or(String::new(), T::to_string)
}
