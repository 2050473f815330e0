//! Scenario results and their files.
//!
//! Every data file `<stem>.<ext>` is written together with
//! `<stem>.manifest.json` holding the resolved config, seed, versions and
//! wall time. Data files depend only on the config, so reruns reproduce them
//! byte for byte; the manifest's wall time is the only varying field.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::{Format, ScenarioConfig};
use crate::error::{CliError, CliResult};

/// A numeric table; CSV column sets are documented per scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: impl Into<String>, columns: Vec<&'static str>) -> Self {
        Self { name: name.into(), columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| *c == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }

    pub fn to_csv(&self) -> CliResult<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|x| x.to_string()))?;
        }
        w.into_inner().map_err(|e| CliError::Io(e.to_string()))
    }

    pub fn to_jsonl(&self) -> CliResult<Vec<u8>> {
        let mut out = Vec::new();
        for row in &self.rows {
            let obj: serde_json::Map<String, serde_json::Value> =
                self.columns.iter().zip(row).map(|(c, x)| (c.to_string(), serde_json::json!(x))).collect();
            serde_json::to_writer(&mut out, &obj).map_err(|e| CliError::Io(e.to_string()))?;
            out.push(b'\n');
        }
        Ok(out)
    }
}

/// One line of a verification report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    /// Human-readable bound, e.g. `<= 1e-12`.
    pub bound: String,
    pub pass: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, measured: f64, bound: f64) -> Self {
        Self { name: name.into(), measured, bound: format!("<= {bound:e}"), pass: measured <= bound }
    }

    pub fn within(name: impl Into<String>, measured: f64, lo: f64, hi: f64) -> Self {
        Self { name: name.into(), measured, bound: format!("in [{lo}, {hi}]"), pass: lo <= measured && measured <= hi }
    }

    pub fn holds(name: impl Into<String>, ok: bool) -> Self {
        Self { name: name.into(), measured: f64::from(u8::from(ok)), bound: "== 1".into(), pass: ok }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.pass { "PASS" } else { "FAIL" };
        write!(f, "{verdict}  {}: {:.6e} {}", self.name, self.measured, self.bound)
    }
}

/// Everything a scenario produces.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Outcome {
    /// Lines printed by `run`.
    pub summary: Vec<String>,
    pub tables: Vec<Table>,
    /// `(file name, contents)` of text artifacts.
    pub texts: Vec<(String, String)>,
    pub checks: Vec<Check>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    file: String,
    scenario: &'static str,
    seed: u64,
    qfilter_version: &'static str,
    core_version: &'static str,
    command: &'a [String],
    wall_time_seconds: f64,
    config: &'a ScenarioConfig,
}

fn io_err(path: &Path, e: impl fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

fn write_file(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let mut f = fs::File::create(path).map_err(|e| io_err(path, e))?;
    f.write_all(bytes).map_err(|e| io_err(path, e))
}

/// Writes all tables and texts plus one manifest per file; returns the data
/// file paths.
pub fn write_outcome(
    outcome: &Outcome,
    cfg: &ScenarioConfig,
    command: &[String],
    wall_time_seconds: f64,
) -> CliResult<Vec<PathBuf>> {
    let scenario = cfg.scenario()?;
    let dir = cfg.output_dir();
    fs::create_dir_all(&dir).map_err(|e| io_err(&dir, e))?;
    let mut written = Vec::new();
    let mut emit = |stem: String, ext: &str, bytes: Vec<u8>| -> CliResult<()> {
        let path = dir.join(format!("{stem}.{ext}"));
        write_file(&path, &bytes)?;
        let manifest = Manifest {
            file: format!("{stem}.{ext}"),
            scenario: scenario.name(),
            seed: cfg.seed,
            qfilter_version: env!("CARGO_PKG_VERSION"),
            core_version: qfilter_core::VERSION,
            command,
            wall_time_seconds,
            config: cfg,
        };
        let text = serde_json::to_vec_pretty(&manifest).map_err(|e| io_err(&path, e))?;
        write_file(&dir.join(format!("{stem}.manifest.json")), &text)?;
        written.push(path);
        Ok(())
    };
    for t in &outcome.tables {
        let bytes = match cfg.format {
            Format::Csv => t.to_csv()?,
            Format::Jsonl => t.to_jsonl()?,
        };
        emit(t.name.clone(), cfg.format.extension(), bytes)?;
    }
    for (name, body) in &outcome.texts {
        let (stem, ext) = name.rsplit_once('.').unwrap_or((name, "txt"));
        emit(stem.to_string(), ext, body.clone().into_bytes())?;
    }
    Ok(written)
}
