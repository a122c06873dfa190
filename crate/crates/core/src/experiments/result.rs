//! Experiment results and their on-disk artifacts.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gates::GateSequence;

/// A pass/fail comparison recorded in a result.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    /// Human-readable criterion, e.g. `< 1e-7`.
    pub criterion: String,
    pub passed: bool,
}

impl Check {
    pub fn below(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            value,
            criterion: format!("< {limit:e}"),
            passed: value < limit,
        }
    }

    pub fn at_least(name: impl Into<String>, value: f64, min: f64) -> Self {
        Self {
            name: name.into(),
            value,
            criterion: format!(">= {min}"),
            passed: value >= min,
        }
    }

    /// `|value − target| ≤ tol`
    pub fn within(name: impl Into<String>, value: f64, target: f64, tol: f64) -> Self {
        Self {
            name: name.into(),
            value,
            criterion: format!("{target} ± {tol}"),
            passed: (value - target).abs() <= tol,
        }
    }

    /// `|value/target − 1| ≤ rel`
    pub fn relative(name: impl Into<String>, value: f64, target: f64, rel: f64) -> Self {
        Self {
            name: name.into(),
            value,
            criterion: format!("{target} ± {}%", rel * 100.0),
            passed: ((value / target) - 1.0).abs() <= rel,
        }
    }
}

/// Headline metrics recomputed at a larger cutoff.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    /// Cutoffs of the reported run; empty for analytic experiments.
    pub cutoffs: Vec<usize>,
    pub refined_cutoffs: Vec<usize>,
    /// `|refined − reported|` per headline metric.
    pub deltas: BTreeMap<String, f64>,
    pub tolerance: f64,
    pub converged: bool,
}

impl Certificate {
    pub fn analytic(headline: &BTreeMap<String, f64>) -> Self {
        Self {
            cutoffs: Vec::new(),
            refined_cutoffs: Vec::new(),
            deltas: headline.keys().map(|k| (k.clone(), 0.0)).collect(),
            tolerance: 0.0,
            converged: true,
        }
    }

    pub fn compare(
        cutoffs: Vec<usize>,
        refined_cutoffs: Vec<usize>,
        base: &BTreeMap<String, f64>,
        refined: &BTreeMap<String, f64>,
        tolerance: f64,
    ) -> Self {
        let deltas: BTreeMap<String, f64> = base
            .iter()
            .map(|(k, v)| {
                let delta = refined.get(k).map_or(f64::INFINITY, |r| (r - v).abs());
                (k.clone(), delta)
            })
            .collect();
        let converged = deltas.values().all(|d| *d <= tolerance);
        Self {
            cutoffs,
            refined_cutoffs,
            deltas,
            tolerance,
            converged,
        }
    }
}

/// Flat table written as CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
        w.write_record(&self.columns).map_err(io)?;
        for row in &self.rows {
            w.write_record(row).map_err(io)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub schema_version: u32,
    pub name: String,
    pub kind: String,
    pub headline: BTreeMap<String, f64>,
    pub certificate: Certificate,
    /// Scalars and rules of the compiled plan.
    pub plan: serde_json::Value,
    pub wall_time_s: f64,
    /// Largest top-level weight after each gate of the main run.
    pub leakage: Vec<f64>,
    pub max_leakage: f64,
    pub diagnostics: BTreeMap<String, f64>,
    /// Categorical outcomes, e.g. which shift rule the data matched.
    pub labels: BTreeMap<String, String>,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<Table>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sequence: Option<GateSequence<f64>>,
}

impl ExperimentResult {
    pub fn all_checks_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failed_checks(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn metric(&self, name: &str) -> Option<f64> {
        self.headline.get(name).or_else(|| self.diagnostics.get(name)).copied()
    }
}

/// Files written by [`write_artifacts`].
#[derive(Clone, Debug, PartialEq)]
pub struct Artifacts {
    pub result: PathBuf,
    pub sequence: Option<PathBuf>,
    pub table: Option<PathBuf>,
}

/// Writes `result.json`, plus `sequence.txt` and `table.csv` when present.
/// Each file is written to a temporary name and renamed into place.
pub fn write_artifacts(result: &ExperimentResult, dir: &Path) -> Result<Artifacts> {
    fs::create_dir_all(dir)?;
    let json = serde_json::to_string_pretty(result).map_err(|e| Error::Io(std::io::Error::other(e)))?;
    let result_path = atomic_write(dir, "result.json", &json)?;
    let sequence = match &result.sequence {
        Some(seq) => Some(atomic_write(dir, "sequence.txt", &seq.to_string())?),
        None => None,
    };
    let table = match &result.table {
        Some(t) => Some(atomic_write(dir, "table.csv", &t.to_csv()?)?),
        None => None,
    };
    Ok(Artifacts {
        result: result_path,
        sequence,
        table,
    })
}

fn atomic_write(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    let target = dir.join(name);
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
    }
    fs::rename(&tmp, &target)?;
    Ok(target)
}
