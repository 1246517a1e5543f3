//! Result records and their on-disk form: one CSV per table plus
//! `manifest.json` with the config echo, checks and versions.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::{Experiment, RunConfig};
use crate::error::{io_err, Result};

/// A numeric table. NaN cells are written as empty fields.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    #[serde(skip)]
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: impl Into<String>, columns: &[&str]) -> Self {
        Self { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(&self.columns)?;
        for r in &self.rows {
            w.write_record(r.iter().map(|v| if v.is_nan() { String::new() } else { format!("{v:e}") }))?;
        }
        w.flush().map_err(io_err(path))?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResultRecord {
    pub experiment: Experiment,
    pub config: RunConfig,
    pub tables: Vec<Table>,
    pub checks: Vec<Check>,
    pub wall_seconds: f64,
    pub version: String,
}

impl ResultRecord {
    pub fn new(config: &RunConfig) -> Self {
        Self {
            experiment: config.experiment,
            config: config.clone(),
            tables: Vec::new(),
            checks: Vec::new(),
            wall_seconds: 0.0,
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    pub fn check(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check { name: name.into(), passed, detail: detail.into() });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    /// Writes every table and the manifest into `dir`, returning the paths.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
        let mut out = Vec::new();
        for t in &self.tables {
            let p = dir.join(format!("{}.csv", t.name));
            t.write_csv(&p)?;
            out.push(p);
        }
        let p = dir.join("manifest.json");
        let text = serde_json::to_string_pretty(&Manifest {
            record: self,
            files: self.tables.iter().map(|t| format!("{}.csv", t.name)).collect(),
        })?;
        std::fs::write(&p, text + "\n").map_err(io_err(&p))?;
        out.push(p);
        Ok(out)
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    #[serde(flatten)]
    record: &'a ResultRecord,
    files: Vec<String>,
}

/// log2(coarse/fine) for consecutive halvings, NaN otherwise.
pub fn orders(steps: &[f64], errs: &[f64]) -> Vec<f64> {
    let mut o = vec![f64::NAN; errs.len()];
    for i in 1..errs.len() {
        if (steps[i - 1] / steps[i] - 2.0).abs() < 1e-12 {
            o[i] = (errs[i - 1] / errs[i]).log2();
        }
    }
    o
}
