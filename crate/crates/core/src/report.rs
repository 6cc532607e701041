//! Self-describing command reports.
//!
//! Every number carries the `module::operation` that produced it. Reports
//! embed the conventions and tolerances in force and serialize to JSON that
//! parses back to an equal value.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Conventions {
    pub hbar: f64,
    pub vacuum_symplectic_eigenvalue: f64,
    pub logarithm: String,
    pub ordering: String,
}

impl Default for Conventions {
    fn default() -> Self {
        Self {
            hbar: 1.0,
            vacuum_symplectic_eigenvalue: 0.5,
            logarithm: "natural".into(),
            ordering: "positions-first (x_1..x_n, p_1..p_n)".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Value {
    Number(f64),
    Integer(i64),
    Text(String),
    Flag(bool),
    Vector(Vec<f64>),
    Matrix(Vec<Vec<f64>>),
    /// No value, e.g. a decoherence time beyond the horizon.
    Absent,
}

impl Value {
    pub fn vector(v: &DVector<f64>) -> Self {
        Value::Vector(v.iter().copied().collect())
    }

    pub fn matrix(m: &DMatrix<f64>) -> Self {
        Value::Matrix((0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect())
    }

    fn render(&self) -> String {
        match self {
            Value::Number(x) => format_number(*x),
            Value::Integer(i) => i.to_string(),
            Value::Text(s) => s.clone(),
            Value::Flag(b) => b.to_string(),
            Value::Vector(v) => render_row(v),
            Value::Matrix(rows) => rows.iter().map(|r| render_row(r)).collect::<Vec<_>>().join(" "),
            Value::Absent => "-".into(),
        }
    }
}

fn format_number(x: f64) -> String {
    if x == 0.0 || (1e-3..1e6).contains(&x.abs()) {
        format!("{x:.10}").trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        format!("{x:.6e}")
    }
}

fn render_row(v: &[f64]) -> String {
    format!("[{}]", v.iter().map(|x| format_number(*x)).collect::<Vec<_>>().join(", "))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Entry {
    pub section: String,
    pub key: String,
    pub value: Value,
    pub provenance: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: String,
    pub config: String,
    pub conventions: Conventions,
    pub tolerances: BTreeMap<String, f64>,
    pub entries: Vec<Entry>,
    /// False when a check performed by the command failed.
    pub passed: bool,
    /// Seconds since the Unix epoch; the only wall-clock field, ignored by `==`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<u64>,
}

impl PartialEq for Report {
    fn eq(&self, other: &Self) -> bool {
        self.schema_version == other.schema_version
            && self.command == other.command
            && self.config == other.config
            && self.conventions == other.conventions
            && self.tolerances == other.tolerances
            && self.entries == other.entries
            && self.passed == other.passed
    }
}

impl Report {
    pub fn new(command: impl Into<String>, config: impl Into<String>, tolerances: BTreeMap<String, f64>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            command: command.into(),
            config: config.into(),
            conventions: Conventions::default(),
            tolerances,
            entries: Vec::new(),
            passed: true,
            timestamp: None,
        }
    }

    pub fn push(&mut self, section: impl Into<String>, key: impl Into<String>, value: Value, provenance: &str) {
        self.entries.push(Entry {
            section: section.into(),
            key: key.into(),
            value,
            provenance: provenance.into(),
        });
    }

    pub fn number(&mut self, section: impl Into<String>, key: impl Into<String>, x: f64, provenance: &str) {
        self.push(section, key, Value::Number(x), provenance);
    }

    /// Records a pass/fail check; a failure marks the whole report failed.
    pub fn check(&mut self, section: impl Into<String>, key: impl Into<String>, ok: bool, provenance: &str) {
        self.passed &= ok;
        self.push(section, key, Value::Flag(ok), provenance);
    }

    pub fn get(&self, section: &str, key: &str) -> Option<&Value> {
        self.entries
            .iter()
            .find(|e| e.section == section && e.key == key)
            .map(|e| &e.value)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Numerical(format!("report serialization: {e}")))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    /// Plain-text table grouped by section.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} {}", self.command, self.config);
        let width = self.entries.iter().map(|e| e.key.chars().count()).max().unwrap_or(0);
        let mut section: Option<&str> = None;
        for e in &self.entries {
            if section != Some(e.section.as_str()) {
                let _ = writeln!(out, "\n[{}]", e.section);
                section = Some(&e.section);
            }
            let _ = writeln!(out, "  {:<width$}  {}", e.key, e.value.render());
        }
        let _ = writeln!(out, "\nstatus: {}", if self.passed { "ok" } else { "FAILED" });
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Report {
        let mut tol = BTreeMap::new();
        tol.insert("canonicity".into(), 1e-10);
        let mut r = Report::new("compare", "pair.cfg", tol);
        r.number("1|2", "log_negativity", 0.1 + 0.2, "entanglement::analyze");
        r.push("1|2", "spectrum", Value::Vector(vec![1.0 / 3.0, 2.0f64.sqrt()]), "gaussian_state::symplectic_spectrum");
        r.push("x", "m", Value::Matrix(vec![vec![1e-300, -0.0], vec![5e300, 7.0]]), "t::t");
        r.push("x", "t", Value::Absent, "t::t");
        r.check("x", "ok", true, "t::t");
        r
    }

    #[test]
    fn json_round_trip_is_exact() {
        let r = sample();
        let back = Report::from_json(&r.to_json().unwrap()).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.to_json().unwrap(), r.to_json().unwrap());
    }

    #[test]
    fn timestamp_is_ignored_by_equality() {
        let a = sample();
        let mut b = sample();
        b.timestamp = Some(1_700_000_000);
        assert_eq!(a, b);
        assert!(!a.to_json().unwrap().contains("timestamp"));
    }

    #[test]
    fn failed_check_marks_report() {
        let mut r = sample();
        r.check("x", "bad", false, "t::t");
        assert!(!r.passed);
        assert!(r.to_table().contains("FAILED"));
    }

    #[test]
    fn table_lists_sections() {
        let t = sample().to_table();
        assert!(t.contains("[1|2]") && t.contains("log_negativity"));
    }
}
