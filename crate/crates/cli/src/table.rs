//! Rectangular result tables with a metadata header, written as CSV or JSON.

use std::io::Write;

use serde_json::{json, Map, Value};

use crate::config::{fmt_f64, Format, RunConfig};

pub const UNITS: &str = "energies, couplings and rates in units of h; times in units of 1/h; temperature in units of h; magnetization per spin";

/// Marker written in place of values inside a critical guard radius.
pub const SKIPPED: &str = "skipped";

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Value(f64),
    Skipped,
}

impl Cell {
    pub fn value(&self) -> Option<f64> {
        match self {
            Cell::Value(v) => Some(*v),
            Cell::Skipped => None,
        }
    }

    fn csv(&self) -> String {
        match self {
            Cell::Value(v) => fmt_f64(*v),
            Cell::Skipped => SKIPPED.to_string(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Value(v) => json!(v),
            Cell::Skipped => json!(SKIPPED),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Metadata {
    pub command: String,
    /// Canonical run parameters; these re-parse as a config.
    pub parameters: Vec<(String, String)>,
    /// Derived diagnostics (statistics, counts), informational only.
    pub notes: Vec<(String, String)>,
    /// Seconds since the Unix epoch. Excluded from determinism guarantees.
    pub timestamp: u64,
}

impl Metadata {
    pub fn for_run(config: &RunConfig) -> Self {
        Metadata {
            command: config.command.as_str().to_string(),
            parameters: config
                .parameters()
                .into_iter()
                .map(|(k, v)| (k.to_string(), v))
                .collect(),
            notes: Vec::new(),
            timestamp: timestamp(),
        }
    }
}

/// `SOURCE_DATE_EPOCH` if set, else the wall clock.
fn timestamp() -> u64 {
    std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or_else(|| {
            std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0)
        })
}

/// Every row starts with the swept value(s) that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub metadata: Metadata,
}

impl ResultTable {
    pub fn new(columns: Vec<String>, metadata: Metadata) -> Self {
        ResultTable {
            columns,
            rows: Vec::new(),
            metadata,
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width does not match the header");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<Cell>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn write<W: Write>(&self, format: Format, out: W) -> std::io::Result<()> {
        match format {
            Format::Csv => self.write_csv(out),
            Format::Json => self.write_json(out),
        }
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let m = &self.metadata;
        writeln!(out, "# program: lmg {}", env!("CARGO_PKG_VERSION"))?;
        writeln!(out, "# command: {}", m.command)?;
        writeln!(out, "# units: {UNITS}")?;
        for (k, v) in &m.parameters {
            writeln!(out, "# {k} = {v}")?;
        }
        for (k, v) in &m.notes {
            writeln!(out, "# note {k}: {v}")?;
        }
        writeln!(out, "# timestamp: {}", m.timestamp)?;
        writeln!(out, "{}", self.columns.join(","))?;
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            writeln!(out, "{}", cells.join(","))?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        let m = &self.metadata;
        let strings = |pairs: &[(String, String)]| -> Map<String, Value> {
            pairs.iter().map(|(k, v)| (k.clone(), json!(v))).collect()
        };
        json!({
            "program": format!("lmg {}", env!("CARGO_PKG_VERSION")),
            "command": m.command,
            "units": UNITS,
            "parameters": strings(&m.parameters),
            "notes": strings(&m.notes),
            "timestamp": m.timestamp,
            "columns": self.columns,
            "rows": self.rows.iter().map(|r| r.iter().map(Cell::json).collect::<Vec<_>>()).collect::<Vec<_>>(),
        })
    }

    pub fn write_json<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        serde_json::to_writer_pretty(&mut out, &self.to_json())?;
        writeln!(out)
    }
}
