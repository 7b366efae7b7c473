//! Result tables and their CSV / JSON persistence.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::{Deserialize, Serialize};

use crate::config::FileConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Bool(bool),
    Int(i64),
    Num(f64),
    Text(String),
    Empty,
}

impl Cell {
    /// Non-finite numbers become empty cells (they have no JSON form).
    pub fn num(x: f64) -> Self {
        if x.is_finite() {
            Cell::Num(x)
        } else {
            Cell::Empty
        }
    }

    pub fn opt(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::num)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::num(x)
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

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Bool(b) => write!(f, "{b}"),
            Cell::Int(i) => write!(f, "{i}"),
            Cell::Num(x) => write!(f, "{x}"),
            Cell::Text(s) => f.write_str(s),
            Cell::Empty => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    /// Scalar results reported next to the rows (critical points, targets).
    pub summary: BTreeMap<String, f64>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|c| c.to_string()).collect(), ..Self::default() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width does not match the header");
        self.rows.push(row);
    }

    pub fn note(&mut self, key: impl Into<String>, value: f64) {
        if value.is_finite() {
            self.summary.insert(key.into(), value);
        }
    }

    /// Prepends a constant column, as used by sweeps.
    pub fn with_leading(mut self, name: &str, value: Cell) -> Self {
        self.columns.insert(0, name.to_string());
        for row in &mut self.rows {
            row.insert(0, value.clone());
        }
        self
    }

    /// Appends the rows of `other`, which must have the same columns.
    pub fn extend(&mut self, other: Table) {
        assert_eq!(self.columns, other.columns, "tables with different columns");
        self.rows.extend(other.rows);
        self.summary.extend(other.summary);
    }

    pub fn write_csv(&self, out: impl Write) -> anyhow::Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|c| c.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// JSON companion of every CSV file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub preset: Option<String>,
    pub arguments: Vec<String>,
    pub seed: u64,
    pub wall_clock_s: f64,
    pub config: FileConfig,
    pub summary: BTreeMap<String, f64>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

pub fn version() -> String {
    concat!(env!("CARGO_PKG_VERSION"), " (", env!("CACHENET_GIT_DESCRIBE"), ")").to_string()
}

/// Writes `<dir>/<stem>.csv` and `<dir>/<stem>.json`; returns both paths.
pub fn write_outputs(dir: &Path, stem: &str, table: &Table, envelope: &Envelope) -> anyhow::Result<(PathBuf, PathBuf)> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let csv_path = dir.join(format!("{stem}.csv"));
    let json_path = dir.join(format!("{stem}.json"));
    let file = File::create(&csv_path).with_context(|| format!("creating {}", csv_path.display()))?;
    table.write_csv(BufWriter::new(file))?;
    let mut json =
        BufWriter::new(File::create(&json_path).with_context(|| format!("creating {}", json_path.display()))?);
    serde_json::to_writer_pretty(&mut json, envelope)?;
    json.write_all(b"\n")?;
    json.flush()?;
    Ok((csv_path, json_path))
}
