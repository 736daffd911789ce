//! Table assembly and the CSV/JSON writers.
//!
//! Every subcommand produces a flat table; this module owns the one rule
//! set for turning it into bytes. Floats print with 17 significant digits
//! so a CSV file round-trips losslessly, and non-finite values become
//! empty fields (CSV) or null (JSON) with the explanation living in a
//! dedicated reason column.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use overcomp::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// One table cell. `Empty` is the explicit "not applicable" marker; it is
/// distinct from a float NaN only in intent, both serialize the same way.
#[derive(Debug, Clone)]
pub enum Cell {
    F(f64),
    U(u64),
    B(bool),
    S(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::F(v)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::U(v)
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::S(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::S(v.to_string())
    }
}

/// Optional values collapse to `Empty`.
impl From<Option<Cell>> for Cell {
    fn from(v: Option<Cell>) -> Self {
        v.unwrap_or(Cell::Empty)
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

fn csv_escape(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn csv_cell(cell: &Cell) -> String {
    match cell {
        // 17 significant digits: enough to reproduce any f64 exactly.
        Cell::F(v) if v.is_finite() => format!("{v:.16e}"),
        Cell::F(_) => String::new(),
        Cell::U(v) => v.to_string(),
        Cell::B(b) => b.to_string(),
        Cell::S(s) => csv_escape(s),
        Cell::Empty => String::new(),
    }
}

fn json_cell(cell: &Cell) -> serde_json::Value {
    match cell {
        Cell::F(v) => serde_json::Number::from_f64(*v)
            .map(serde_json::Value::Number)
            .unwrap_or(serde_json::Value::Null),
        Cell::U(v) => serde_json::Value::from(*v),
        Cell::B(b) => serde_json::Value::from(*b),
        Cell::S(s) => serde_json::Value::from(s.as_str()),
        Cell::Empty => serde_json::Value::Null,
    }
}

pub fn render(table: &Table, format: Format) -> String {
    match format {
        Format::Csv => {
            let mut out = String::new();
            out.push_str(&table.columns.iter().map(|c| csv_escape(c)).collect::<Vec<_>>().join(","));
            out.push('\n');
            for row in &table.rows {
                out.push_str(&row.iter().map(csv_cell).collect::<Vec<_>>().join(","));
                out.push('\n');
            }
            out
        }
        Format::Json => {
            let rows: Vec<serde_json::Value> = table
                .rows
                .iter()
                .map(|row| {
                    let obj: serde_json::Map<String, serde_json::Value> = table
                        .columns
                        .iter()
                        .zip(row)
                        .map(|(c, cell)| (c.clone(), json_cell(cell)))
                        .collect();
                    serde_json::Value::Object(obj)
                })
                .collect();
            let mut out = serde_json::to_string_pretty(&serde_json::Value::Array(rows))
                .expect("tables always serialize");
            out.push('\n');
            out
        }
    }
}

/// Writes the table to `out`, or to stdout when no path was given.
pub fn emit(table: &Table, out: Option<&Path>, format: Format) -> Result<()> {
    let rendered = render(table, format);
    match out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            w.write_all(rendered.as_bytes())?;
            w.flush()?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut w = stdout.lock();
            w.write_all(rendered.as_bytes())?;
        }
    }
    Ok(())
}

/// Sibling file next to `out`: stem gains a dotted tag, extension stays.
/// `results.csv` with tag `trace.d100` becomes `results.trace.d100.csv`.
pub fn sibling_path(out: &Path, tag: &str) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    let ext = out.extension().and_then(|s| s.to_str());
    let name = match ext {
        Some(ext) => format!("{stem}.{tag}.{ext}"),
        None => format!("{stem}.{tag}"),
    };
    out.with_file_name(name)
}
