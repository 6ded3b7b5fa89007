//! Tabular results and their CSV / JSON encodings.
//!
//! Numbers are written with Rust's shortest round-trip formatting, so equal
//! tables always encode to identical bytes.

use std::io::Write;

use serde_json::{json, Value};

use crate::error::Result;
use crate::spec::Format;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Bool(bool),
    /// Undefined value, written as an empty CSV field and JSON `null`.
    Empty,
}

impl Cell {
    pub fn opt(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Num)
    }

    fn csv_field(&self) -> String {
        match self {
            Cell::Num(x) if x.is_finite() => format!("{x:?}"),
            Cell::Num(x) if x.is_nan() => "NaN".into(),
            Cell::Num(x) => if *x > 0.0 { "inf" } else { "-inf" }.into(),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) if x.is_finite() => json!(x),
            Cell::Num(_) | Cell::Empty => Value::Null,
            Cell::Int(i) => json!(i),
            Cell::Text(s) => json!(s),
            Cell::Bool(b) => json!(b),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Num(x) => Some(*x),
            Cell::Int(i) => Some(*i as f64),
            _ => None,
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Bool(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn with_columns(columns: Vec<String>) -> Self {
        Self {
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Numeric values of one column (`None` for non-numeric cells).
    pub fn column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let k = self.column_index(name)?;
        Some(self.rows.iter().map(|r| r[k].as_f64()).collect())
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(&self.columns)?;
        for row in &self.rows {
            out.write_record(row.iter().map(Cell::csv_field))?;
        }
        out.flush().map_err(|e| crate::error::Error::Output(e.to_string()))?;
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        json!({
            "columns": self.columns,
            "rows": self.rows.iter().map(|r| r.iter().map(Cell::json).collect::<Vec<_>>()).collect::<Vec<_>>(),
        })
    }

    pub fn encode(&self, format: Format) -> Result<Vec<u8>> {
        let mut buf = Vec::new();
        match format {
            Format::Csv => self.write_csv(&mut buf)?,
            Format::Json => {
                serde_json::to_writer_pretty(&mut buf, &self.to_json())?;
                buf.push(b'\n');
            }
        }
        Ok(buf)
    }
}

/// Output of one command: a main table plus optional named overlay tables.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Report {
    pub table: Table,
    pub overlays: Vec<(String, Table)>,
}

impl From<Table> for Report {
    fn from(table: Table) -> Self {
        Self {
            table,
            overlays: Vec::new(),
        }
    }
}

impl Report {
    /// JSON encodes the overlays inline; CSV encodes only the main table.
    pub fn encode(&self, format: Format) -> Result<Vec<u8>> {
        match format {
            Format::Csv => self.table.encode(format),
            Format::Json => {
                let mut v = self.table.to_json();
                if !self.overlays.is_empty() {
                    let mut o = serde_json::Map::new();
                    for (name, t) in &self.overlays {
                        o.insert(name.clone(), t.to_json());
                    }
                    v["overlays"] = Value::Object(o);
                }
                let mut buf = serde_json::to_vec_pretty(&v)?;
                buf.push(b'\n');
                Ok(buf)
            }
        }
    }
}
