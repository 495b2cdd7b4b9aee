//! Verdict summaries and CSV tables.

use std::fs;
use std::io;
use std::path::Path;
use std::time::Instant;

use serde::Serialize;

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    /// Measured exponent, ratio or error; `null` when the check did not produce a number.
    pub measured: Option<f64>,
    pub tolerance: Option<f64>,
    pub runtime_s: f64,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize, Default)]
pub struct VerdictReport {
    pub experiment: String,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub runtime_s: f64,
}

impl VerdictReport {
    pub fn new(experiment: &str) -> Self {
        Self {
            experiment: experiment.to_string(),
            passed: true,
            ..Self::default()
        }
    }

    /// Time `body`, which returns `(pass, measured, tolerance, detail)`.
    pub fn run(
        &mut self,
        name: impl Into<String>,
        body: impl FnOnce() -> (bool, Option<f64>, Option<f64>, String),
    ) {
        let start = Instant::now();
        let (pass, measured, tolerance, detail) = body();
        self.push(Check {
            name: name.into(),
            pass,
            measured: measured.filter(|v| v.is_finite()),
            tolerance,
            runtime_s: start.elapsed().as_secs_f64(),
            detail,
        });
    }

    pub fn push(&mut self, check: Check) {
        assert!(
            self.checks.iter().all(|c| c.name != check.name),
            "check '{}' recorded twice",
            check.name
        );
        self.passed &= check.pass;
        self.checks.push(check);
    }

    pub fn fail(&mut self, name: impl Into<String>, detail: impl Into<String>) {
        self.push(Check {
            name: name.into(),
            pass: false,
            measured: None,
            tolerance: None,
            runtime_s: 0.0,
            detail: detail.into(),
        });
    }

    pub fn write(&self, path: &Path) -> io::Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(io::Error::other)?;
        fs::write(path, text + "\n")
    }
}

/// 17 significant digits, so values survive a text round trip bit for bit.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.header.len());
        self.rows.push(cells);
    }

    pub fn write(&self, path: &Path) -> io::Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()
    }
}
