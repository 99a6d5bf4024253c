//! Check records, tables and the run report.

use crate::config::ExperimentConfig;
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::fmt;
use std::io;
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Tsv,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Tsv => "tsv",
        }
    }

    fn delimiter(self) -> u8 {
        match self {
            Format::Csv => b',',
            Format::Tsv => b'\t',
        }
    }
}

/// How a value is compared with its tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Below,
    AtLeast,
    AtMost,
}

impl Relation {
    pub fn holds(self, value: f64, tolerance: f64) -> bool {
        match self {
            Relation::Below => value < tolerance,
            Relation::AtLeast => value >= tolerance,
            Relation::AtMost => value <= tolerance,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Below => "<",
            Relation::AtLeast => ">=",
            Relation::AtMost => "<=",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub relation: Relation,
    pub pass: bool,
    pub wall_time_s: f64,
    /// Set when the check could not be evaluated.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl fmt::Display for CheckRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.pass { "PASS" } else { "FAIL" };
        match &self.error {
            Some(e) => write!(f, "{verdict} {}: error: {e}", self.name),
            None => write!(
                f,
                "{verdict} {}: {:.3e} {} {:.1e} ({:.2}s)",
                self.name,
                self.value,
                self.relation.symbol(),
                self.tolerance,
                self.wall_time_s
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub config_hash: String,
    pub version: String,
}

impl Provenance {
    pub fn of(config: &ExperimentConfig) -> Self {
        let digest = Sha256::digest(config.canonical().as_bytes());
        Self {
            config_hash: digest.iter().map(|b| format!("{b:02x}")).collect(),
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub subcommand: String,
    pub provenance: Provenance,
    pub checks: Vec<CheckRecord>,
    /// Files written, relative to the output directory.
    pub files: Vec<String>,
}

impl RunReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Rows of strings under a header.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write(&self, path: &Path, format: Format) -> io::Result<()> {
        let mut w = csv::WriterBuilder::new().delimiter(format.delimiter()).from_path(path)?;
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()
    }
}

/// Full-precision rendering used in every table.
pub fn num(v: f64) -> String {
    format!("{v:.17e}")
}

/// Collects checks and tables for one subcommand.
pub struct Session {
    pub dir: PathBuf,
    pub format: Format,
    pub checks: Vec<CheckRecord>,
    pub files: Vec<String>,
}

impl Session {
    pub fn new(dir: PathBuf, format: Format) -> Self {
        Self {
            dir,
            format,
            checks: Vec::new(),
            files: Vec::new(),
        }
    }

    /// Runs `f`, which returns the measured value, and records the outcome.
    pub fn check(
        &mut self,
        name: &str,
        relation: Relation,
        tolerance: f64,
        f: impl FnOnce() -> Result<f64, String>,
    ) -> Option<f64> {
        let t = Instant::now();
        let out = f();
        let wall_time_s = t.elapsed().as_secs_f64();
        let rec = match out {
            Ok(value) => CheckRecord {
                name: name.into(),
                value,
                tolerance,
                relation,
                pass: relation.holds(value, tolerance),
                wall_time_s,
                error: None,
            },
            Err(e) => CheckRecord {
                name: name.into(),
                value: f64::NAN,
                tolerance,
                relation,
                pass: false,
                wall_time_s,
                error: Some(e),
            },
        };
        println!("{rec}");
        let value = rec.error.is_none().then_some(rec.value);
        self.checks.push(rec);
        value
    }

    pub fn table(&mut self, stem: &str, table: &Table) -> io::Result<()> {
        let name = format!("{stem}.{}", self.format.extension());
        table.write(&self.dir.join(&name), self.format)?;
        self.files.push(name);
        Ok(())
    }

    /// Writes `<sub>_summary` with name, value, tolerance, relation and
    /// pass flag; wall times go to the report only so that tables stay
    /// reproducible.
    pub fn finish(mut self, subcommand: &str, provenance: Provenance) -> io::Result<RunReport> {
        let mut t = Table::new(&["check", "value", "tolerance", "relation", "pass"]);
        for c in &self.checks {
            t.push(vec![
                c.name.clone(),
                num(c.value),
                num(c.tolerance),
                c.relation.symbol().into(),
                c.pass.to_string(),
            ]);
        }
        self.table(&format!("{subcommand}_summary"), &t)?;
        Ok(RunReport {
            subcommand: subcommand.into(),
            provenance,
            checks: self.checks,
            files: self.files,
        })
    }
}

pub fn write_report(report: &RunReport, dir: &Path) -> io::Result<()> {
    let text = toml::to_string(report).map_err(io::Error::other)?;
    std::fs::write(dir.join(format!("{}_report.toml", report.subcommand)), text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relations() {
        assert!(Relation::Below.holds(1.0, 2.0) && !Relation::Below.holds(2.0, 2.0));
        assert!(Relation::AtLeast.holds(2.0, 2.0) && !Relation::AtLeast.holds(1.0, 2.0));
        assert!(Relation::AtMost.holds(2.0, 2.0));
        assert!(!Relation::Below.holds(f64::NAN, 1.0) && !Relation::AtLeast.holds(f64::NAN, 1.0));
    }

    #[test]
    fn hash_tracks_config() {
        let a = ExperimentConfig::default();
        let b = ExperimentConfig { seed: 3, ..a.clone() };
        assert_eq!(Provenance::of(&a), Provenance::of(&a.clone()));
        assert_ne!(Provenance::of(&a).config_hash, Provenance::of(&b).config_hash);
        assert_eq!(Provenance::of(&a).config_hash.len(), 64);
    }
}
