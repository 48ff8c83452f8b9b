use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, ExperimentKind};
use crate::error::{Error, Result};

/// A CSV table: one header, numeric rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self { name: name.into(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).map_err(csv_err)?;
        for r in &self.rows {
            w.write_record(r.iter().map(|v| v.to_string())).map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is ascii"))
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e.to_string()))
}

/// One acceptance assertion: `value` compared against `threshold`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    /// Passes when `value ≤ threshold`.
    pub fn at_most(name: &str, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            threshold,
            passed: value <= threshold,
            detail: format!("{value:.6e} <= {threshold:.6e}"),
        }
    }

    /// Passes when `value ≥ threshold`.
    pub fn at_least(name: &str, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            threshold,
            passed: value >= threshold,
            detail: format!("{value:.6e} >= {threshold:.6e}"),
        }
    }

    pub fn flag(name: &str, passed: bool, detail: String) -> Self {
        Self { name: name.into(), value: if passed { 1.0 } else { 0.0 }, threshold: 1.0, passed, detail }
    }

    /// Passes when the sequence strictly decreases.
    pub fn decreasing(name: &str, values: &[f64]) -> Self {
        let ok = values.windows(2).all(|w| w[1] < w[0]);
        let shown: Vec<String> = values.iter().map(|v| format!("{v:.4e}")).collect();
        Self::flag(name, ok, format!("[{}]", shown.join(", ")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub kind: ExperimentKind,
    pub tables: Vec<Table>,
    pub checks: Vec<Check>,
    /// Every tolerance actually used by the checks, by name.
    pub tolerances: BTreeMap<String, f64>,
}

impl Report {
    pub fn new(kind: ExperimentKind) -> Self {
        Self { kind, tables: Vec::new(), checks: Vec::new(), tolerances: BTreeMap::new() }
    }

    pub fn tolerance(&mut self, name: &str, v: f64) {
        self.tolerances.insert(name.into(), v);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// One `PASS`/`FAIL` line per check.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            s.push_str(&format!("{} {}: {}\n", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail));
        }
        s
    }

    /// Writes `<table>.csv` for every table and `report.json` into `dir`; returns the written paths.
    pub fn write(&self, cfg: &ExperimentConfig, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut out = Vec::new();
        for t in &self.tables {
            let p = dir.join(format!("{}.csv", t.name));
            std::fs::write(&p, t.to_csv()?)?;
            out.push(p);
        }
        let meta = Metadata {
            kind: self.kind,
            passed: self.passed(),
            config: cfg.clone(),
            tolerances: self.tolerances.clone(),
            checks: self.checks.clone(),
            tables: self.tables.iter().map(|t| format!("{}.csv", t.name)).collect(),
            parallel: cfg.policy.is_parallel(),
        };
        let p = dir.join("report.json");
        std::fs::write(&p, serde_json::to_string_pretty(&meta).expect("metadata serializes"))?;
        out.push(p);
        Ok(out)
    }
}

#[derive(Serialize)]
struct Metadata {
    kind: ExperimentKind,
    passed: bool,
    config: ExperimentConfig,
    tolerances: BTreeMap<String, f64>,
    checks: Vec<Check>,
    tables: Vec<String>,
    parallel: bool,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let mut t = Table::new("x", &["eps", "mean"]);
        t.push(vec![0.4, 1.0 / 3.0]);
        assert_eq!(t.to_csv().unwrap(), "eps,mean\n0.4,0.3333333333333333\n");
        assert_eq!(t.column("mean").unwrap(), vec![1.0 / 3.0]);
    }

    #[test]
    fn checks() {
        assert!(Check::decreasing("d", &[3.0, 2.0, 1.0]).passed);
        assert!(!Check::decreasing("d", &[3.0, 3.0]).passed);
        assert!(Check::at_most("a", 1.0, 1.0).passed);
        assert!(!Check::at_least("b", 0.5, 1.0).passed);
    }
}
