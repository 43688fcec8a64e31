//! Tabular results written as CSV (header line, units line, data) and as
//! JSON with the same field names.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};

use super::config::Format;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    Bool(bool),
    /// Undefined value, e.g. a standard error from a single trajectory.
    Missing,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(v) => format!("{v:e}"),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Missing => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(v) if v.is_finite() => json!(v),
            Cell::Num(_) | Cell::Missing => Value::Null,
            Cell::Int(v) => json!(v),
            Cell::Text(s) => json!(s),
            Cell::Bool(b) => json!(b),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Num(v) => Some(*v),
            Cell::Int(v) => Some(*v as f64),
            _ => None,
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Missing, Cell::Num)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DataTable {
    pub name: String,
    /// (name, unit); unit "1" for dimensionless, "-" for labels.
    pub columns: Vec<(String, String)>,
    pub rows: Vec<Vec<Cell>>,
}

impl DataTable {
    pub fn new(name: impl Into<String>, columns: &[(&str, &str)]) -> Self {
        Self {
            name: name.into(),
            columns: columns.iter().map(|(n, u)| (n.to_string(), u.to_string())).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width for table {}", self.name);
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|(n, _)| n == name)
    }

    pub fn to_csv(&self, config_hash: &str, seed: u64) -> String {
        let mut out = String::new();
        let names: Vec<&str> = self.columns.iter().map(|(n, _)| n.as_str()).collect();
        let units: Vec<&str> = self.columns.iter().map(|(_, u)| u.as_str()).collect();
        out.push_str(&names.join(","));
        out.push_str(",config_hash,seed\n");
        out.push_str(&units.join(","));
        out.push_str(",-,-\n");
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            out.push_str(&cells.join(","));
            out.push_str(&format!(",{config_hash},{seed}\n"));
        }
        out
    }

    pub fn to_json(&self, config_hash: &str, seed: u64) -> Value {
        let units: Map<String, Value> = self.columns.iter().map(|(n, u)| (n.clone(), json!(u))).collect();
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let mut obj: Map<String, Value> =
                    self.columns.iter().zip(row).map(|((n, _), c)| (n.clone(), c.json())).collect();
                obj.insert("config_hash".into(), json!(config_hash));
                obj.insert("seed".into(), json!(seed));
                Value::Object(obj)
            })
            .collect();
        json!({
            "table": self.name,
            "config_hash": config_hash,
            "seed": seed,
            "units": units,
            "rows": rows,
        })
    }
}

/// Writes each table to `dir` and returns the paths written.
pub fn write_tables(
    dir: &Path,
    tables: &[DataTable],
    format: Format,
    config_hash: &str,
    seed: u64,
) -> io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for t in tables {
        if format == Format::Csv {
            let p = dir.join(format!("{}.csv", t.name));
            fs::write(&p, t.to_csv(config_hash, seed))?;
            written.push(p);
        }
        let p = dir.join(format!("{}.json", t.name));
        let text = serde_json::to_string_pretty(&t.to_json(config_hash, seed)).map_err(io::Error::other)?;
        fs::write(&p, text)?;
        written.push(p);
    }
    Ok(written)
}
