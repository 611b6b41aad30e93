//! Tabular experiment output with `#`-prefixed metadata and CSV emission.

use std::io::Write;
use std::path::Path;

use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Text(String),
    Num(f64),
    Int(i64),
    Bool(bool),
}

impl Value {
    fn render(&self) -> String {
        match self {
            // shortest round-trip formatting is the `{}` default for f64
            Value::Num(v) => format!("{v}"),
            Value::Int(v) => format!("{v}"),
            Value::Bool(v) => format!("{v}"),
            Value::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Num(v)
    }
}

impl From<bool> for Value {
    fn from(v: bool) -> Self {
        Value::Bool(v)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Text(v.to_string())
    }
}

impl From<String> for Value {
    fn from(v: String) -> Self {
        Value::Text(v)
    }
}

/// Ordered result rows plus metadata. Failed rows are kept (marked by the
/// caller, typically with a NaN measurement and `converged = false`) and
/// counted so the CLI can report partial failure.
#[derive(Clone, Debug)]
pub struct ResultTable {
    columns: Vec<String>,
    rows: Vec<Vec<Value>>,
    metadata: Vec<(String, String)>,
    failures: usize,
}

impl ResultTable {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            metadata: vec![("version".into(), env!("CARGO_PKG_VERSION").into())],
            failures: 0,
        }
    }

    pub fn push_metadata(&mut self, key: &str, value: impl ToString) {
        self.metadata.push((key.to_string(), value.to_string()));
    }

    pub fn push_row(&mut self, row: Vec<Value>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::Config(format!(
                "row has {} values for {} columns",
                row.len(),
                self.columns.len()
            )));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn push_failed_row(&mut self, row: Vec<Value>) -> Result<()> {
        self.push_row(row)?;
        self.failures += 1;
        Ok(())
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<Value>] {
        &self.rows
    }

    pub fn failures(&self) -> usize {
        self.failures
    }

    /// Column values as f64 (non-numeric entries become NaN).
    pub fn numeric_column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.columns.iter().position(|c| c == name)?;
        Some(
            self.rows
                .iter()
                .map(|r| match &r[idx] {
                    Value::Num(v) => *v,
                    Value::Int(v) => *v as f64,
                    _ => f64::NAN,
                })
                .collect(),
        )
    }

    /// CSV body: `#` metadata lines, header, then rows. A timestamp line is
    /// appended to the metadata unless `timestamp` is None (tests pass None
    /// so reruns are byte-identical).
    pub fn to_csv(&self, timestamp: Option<u64>) -> String {
        let mut out = String::new();
        for (k, v) in &self.metadata {
            out.push_str(&format!("# {k} = {v}\n"));
        }
        if let Some(ts) = timestamp {
            out.push_str(&format!("# generated_unix = {ts}\n"));
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let rendered: Vec<String> = row.iter().map(Value::render).collect();
            out.push_str(&rendered.join(","));
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let ts = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let mut file = std::fs::File::create(path)?;
        file.write_all(self.to_csv(Some(ts)).as_bytes())?;
        Ok(())
    }
}
