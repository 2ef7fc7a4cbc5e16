//! Rendering of command results as CSV, JSON or aligned text.
//!
//! Every rendering starts with the run metadata. CSV and text put it in
//! `# key: value` lines; JSON puts it under `meta`. Numbers in CSV and JSON
//! use the shortest representation that parses back to the same `f64`;
//! text output shows six significant digits.

use std::fmt::Write as _;

use clap::ValueEnum;
use serde_json::{json, Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Pretty,
}

#[derive(Debug, Clone)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Bool(bool),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
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

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl Cell {
    fn full(&self) -> String {
        match self {
            Cell::Num(v) => num_full(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Bool(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn short(&self) -> String {
        match self {
            Cell::Num(v) => sig6(*v),
            other => other.full(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(v) => serde_json::Number::from_f64(*v).map_or(Value::Null, Value::Number),
            Cell::Int(v) => json!(v),
            Cell::Bool(v) => json!(v),
            Cell::Text(s) => json!(s),
        }
    }
}

/// Shortest round-trip form; non-finite values become `nan`, `inf`, `-inf`.
pub fn num_full(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:?}")
    }
}

/// Six significant digits.
pub fn sig6(v: f64) -> String {
    if !v.is_finite() {
        return num_full(v);
    }
    if v == 0.0 {
        return "0".into();
    }
    let mag = v.abs().log10().floor() as i32;
    if !(-4..6).contains(&mag) {
        return format!("{v:.5e}");
    }
    format!("{v:.*}", (5 - mag).max(0) as usize)
}

/// Self-describing run metadata.
#[derive(Debug, Clone)]
pub struct Meta {
    pub command: String,
    pub params: Vec<(String, String)>,
    pub precision_bits: Option<u32>,
    pub truncation: Option<String>,
    /// Arguments that reproduce the numeric output.
    pub rerun: String,
}

impl Meta {
    fn lines(&self) -> Vec<String> {
        let mut out = vec![format!("command: {}", self.command)];
        for (k, v) in &self.params {
            out.push(format!("{k}: {v}"));
        }
        if let Some(b) = self.precision_bits {
            out.push(format!("precision_bits: {b}"));
        }
        if let Some(t) = &self.truncation {
            out.push(format!("truncation: {t}"));
        }
        out.push(format!("version: {} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION")));
        out.push(format!("rerun: {}", self.rerun));
        out
    }

    fn json(&self) -> Value {
        let params: Map<String, Value> = self.params.iter().map(|(k, v)| (k.clone(), json!(v))).collect();
        json!({
            "command": self.command,
            "params": params,
            "precision_bits": self.precision_bits,
            "truncation": self.truncation,
            "version": env!("CARGO_PKG_VERSION"),
            "rerun": self.rerun,
        })
    }
}

/// A command result: one table plus notes and, for JSON, extra fields.
#[derive(Debug, Clone)]
pub struct Report {
    pub meta: Meta,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    pub notes: Vec<String>,
    pub extra: Map<String, Value>,
}

impl Report {
    pub fn new(meta: Meta, columns: Vec<&'static str>) -> Self {
        Self {
            meta,
            columns,
            rows: Vec::new(),
            notes: Vec::new(),
            extra: Map::new(),
        }
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.csv(),
            Format::Json => self.json(),
            Format::Pretty => self.pretty(),
        }
    }

    fn csv(&self) -> String {
        let mut s = String::new();
        for l in self.meta.lines() {
            let _ = writeln!(s, "# {l}");
        }
        let _ = writeln!(s, "{}", self.columns.join(","));
        for row in &self.rows {
            let fields: Vec<String> = row.iter().map(|c| csv_field(&c.full())).collect();
            let _ = writeln!(s, "{}", fields.join(","));
        }
        for n in &self.notes {
            let _ = writeln!(s, "# {n}");
        }
        s
    }

    fn pretty(&self) -> String {
        let mut s = String::new();
        for l in self.meta.lines() {
            let _ = writeln!(s, "# {l}");
        }
        let cells: Vec<Vec<String>> = self.rows.iter().map(|r| r.iter().map(Cell::short).collect()).collect();
        let widths: Vec<usize> = (0..self.columns.len())
            .map(|j| cells.iter().map(|r| r[j].len()).chain([self.columns[j].len()]).max().unwrap_or(0))
            .collect();
        let line = |fields: Vec<&str>| -> String {
            let padded: Vec<String> = fields.iter().zip(&widths).map(|(f, w)| format!("{f:>w$}")).collect();
            padded.join("  ")
        };
        let _ = writeln!(s, "{}", line(self.columns.clone()));
        for r in &cells {
            let _ = writeln!(s, "{}", line(r.iter().map(String::as_str).collect()));
        }
        for n in &self.notes {
            let _ = writeln!(s, "# {n}");
        }
        s
    }

    fn json(&self) -> String {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                let obj: Map<String, Value> =
                    self.columns.iter().zip(r).map(|(k, c)| (k.to_string(), c.json())).collect();
                Value::Object(obj)
            })
            .collect();
        let mut top = Map::new();
        top.insert("meta".into(), self.meta.json());
        top.insert("rows".into(), Value::Array(rows));
        top.insert("notes".into(), json!(self.notes));
        for (k, v) in &self.extra {
            top.insert(k.clone(), v.clone());
        }
        let mut s = serde_json::to_string_pretty(&Value::Object(top)).expect("JSON value serializes");
        s.push('\n');
        s
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
