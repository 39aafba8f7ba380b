//! Tabular reports written as CSV or JSON.
//!
//! Every file starts with the library version and the config hash. Floats are
//! written with 17 significant digits in CSV and as shortest round-trip
//! decimals in JSON, so both are byte-stable for a given config.

use std::io::Write;

use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;

use crate::config::{ExperimentConfig, Format};
use crate::CliError;

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Bool(bool),
    Text(String),
}

impl Cell {
    pub fn as_f64(&self) -> Option<f64> {
        match *self {
            Cell::Num(x) => Some(x),
            Cell::Int(n) => Some(n as f64),
            _ => None,
        }
    }

    fn csv(&self) -> String {
        match self {
            Cell::Num(x) if x.is_nan() => "NaN".into(),
            Cell::Num(x) if x.is_infinite() => if *x > 0.0 { "inf" } else { "-inf" }.into(),
            Cell::Num(x) => format!("{x:.16e}"),
            Cell::Int(n) => n.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl Serialize for Cell {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            // JSON has no NaN/inf
            Cell::Num(x) if !x.is_finite() => s.collect_str(&Cell::Num(*x).csv()),
            Cell::Num(x) => s.serialize_f64(*x),
            Cell::Int(n) => s.serialize_u64(*n),
            Cell::Bool(b) => s.serialize_bool(*b),
            Cell::Text(t) => s.serialize_str(t),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<u64> for Cell {
    fn from(n: u64) -> Self {
        Cell::Int(n)
    }
}

impl From<usize> for Cell {
    fn from(n: usize) -> Self {
        Cell::Int(n as u64)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.into())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Table { columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| *c == name)
    }

    /// First row whose first cell is the text `key`.
    pub fn row(&self, key: &str) -> Option<&[Cell]> {
        self.rows.iter().find(|r| matches!(&r[0], Cell::Text(t) if t == key)).map(|r| r.as_slice())
    }

    pub fn value(&self, row: &str, column: &str) -> Option<&Cell> {
        Some(&self.row(row)?[self.column(column)?])
    }
}

struct Rows<'a>(&'a Table);

impl Serialize for Rows<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.0.rows.iter().map(|r| Row(&self.0.columns, r)))
    }
}

struct Row<'a>(&'a [&'static str], &'a [Cell]);

impl Serialize for Row<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in self.0.iter().zip(self.1) {
            m.serialize_entry(k, v)?;
        }
        m.end()
    }
}

pub fn write_report<W: Write>(table: &Table, cfg: &ExperimentConfig, mut out: W) -> Result<(), CliError> {
    let version = dirac_tomography::VERSION;
    let hash = cfg.hash();
    match cfg.format {
        Format::Csv => {
            writeln!(out, "# dirac-tomography {version}")?;
            writeln!(out, "# command {} config_sha256 {hash}", cfg.command)?;
            writeln!(out, "{}", table.columns.join(","))?;
            for row in &table.rows {
                let line: Vec<String> = row.iter().map(Cell::csv).collect();
                writeln!(out, "{}", line.join(","))?;
            }
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Doc<'a> {
                version: &'a str,
                command: String,
                config_sha256: &'a str,
                config: &'a ExperimentConfig,
                rows: Rows<'a>,
            }
            let mut canon = cfg.clone();
            canon.protocol = cfg.protocol();
            canon.output_path = "-".into();
            canon.threads = None;
            let doc = Doc { version, command: cfg.command.to_string(), config_sha256: &hash, config: &canon, rows: Rows(table) };
            serde_json::to_writer_pretty(&mut out, &doc).map_err(|e| CliError::Io(e.to_string()))?;
            writeln!(out)?;
        }
    }
    Ok(())
}

/// Writes to `cfg.output_path`, or standard output for `-`.
pub fn emit(table: &Table, cfg: &ExperimentConfig) -> Result<(), CliError> {
    if cfg.output_path == "-" {
        let stdout = std::io::stdout();
        write_report(table, cfg, stdout.lock())
    } else {
        let mut buf = Vec::new();
        write_report(table, cfg, &mut buf)?;
        std::fs::write(&cfg.output_path, buf).map_err(|e| CliError::Io(format!("{}: {e}", cfg.output_path)))
    }
}
