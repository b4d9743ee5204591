//! Result rendering: one tabular model serialized to JSON, JSON-lines, or
//! CSV, written to a file or stdout.
//!
//! All three renderings are deterministic: floating-point values go
//! through the shortest-round-trip formatter, JSON object keys follow the
//! declared column order, and every output ends with a newline. That
//! determinism is load-bearing — identical invocations must produce
//! byte-identical files.

use crate::error::{io_error, CliError};
use clap::ValueEnum;
use serde_json::{Map, Value};
use std::path::Path;

/// Wire format selected with the global `--format` flag.
#[derive(Clone, Copy, Debug, Eq, PartialEq, ValueEnum)]
pub enum OutputFormat {
    /// A JSON object (one result) or array of objects (many results).
    Json,
    /// Comma-separated values with a header row.
    Csv,
    /// One JSON object per line.
    Jsonl,
}

/// An ordered set of named columns plus rows of JSON values.
///
/// Using JSON values as the cell type keeps one renderer for all three
/// formats; `Value::Null` renders as an empty CSV cell.
pub struct Table {
    columns: Vec<String>,
    rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: Vec<S>) -> Table {
        Table {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    /// Appends a row; panics if the width disagrees with the header, since
    /// that is always a programming error in the command building it.
    pub fn push(&mut self, row: Vec<Value>) {
        assert_eq!(
            row.len(),
            self.columns.len(),
            "table row width disagrees with header"
        );
        self.rows.push(row);
    }

    fn row_object(&self, row: &[Value]) -> Value {
        let mut object = Map::new();
        for (column, value) in self.columns.iter().zip(row) {
            object.insert(column.clone(), value.clone());
        }
        Value::Object(object)
    }

    /// Renders the table in `format`. Single-row tables render as a bare
    /// object under `Json`; multi-row tables as an array.
    pub fn render(&self, format: OutputFormat) -> Result<String, CliError> {
        match format {
            OutputFormat::Json => {
                let value = if self.rows.len() == 1 {
                    self.row_object(&self.rows[0])
                } else {
                    Value::Array(self.rows.iter().map(|r| self.row_object(r)).collect())
                };
                let mut text = serde_json::to_string_pretty(&value)
                    .map_err(|e| CliError::Internal(e.to_string()))?;
                text.push('\n');
                Ok(text)
            }
            OutputFormat::Jsonl => {
                let mut text = String::new();
                for row in &self.rows {
                    let line = serde_json::to_string(&self.row_object(row))
                        .map_err(|e| CliError::Internal(e.to_string()))?;
                    text.push_str(&line);
                    text.push('\n');
                }
                Ok(text)
            }
            OutputFormat::Csv => render_delimited(&self.columns, &self.rows, b','),
        }
    }
}

/// Renders rows with an explicit delimiter; used for CSV tables and the
/// tab-separated sample listing.
pub fn render_delimited(
    columns: &[String],
    rows: &[Vec<Value>],
    delimiter: u8,
) -> Result<String, CliError> {
    let mut writer = csv::WriterBuilder::new()
        .delimiter(delimiter)
        .from_writer(Vec::new());
    writer
        .write_record(columns)
        .map_err(|e| CliError::Internal(e.to_string()))?;
    for row in rows {
        let record: Vec<String> = row.iter().map(csv_cell).collect();
        writer
            .write_record(&record)
            .map_err(|e| CliError::Internal(e.to_string()))?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| CliError::Internal(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Internal(e.to_string()))
}

/// One CSV cell: strings verbatim, numbers in shortest-round-trip form,
/// null as the empty cell.
fn csv_cell(value: &Value) -> String {
    match value {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// JSON value for an `f64`, mapping non-finite values to null the same way
/// the JSON serializer does.
pub fn number(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

/// Writes `content` to `path`, or to stdout when no path is given.
pub fn deliver(content: &str, path: Option<&Path>) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, content).map_err(|e| io_error(p, e)),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}
