//! Result files.
//!
//! CSV files start with `#` provenance lines followed by a header row and the
//! data rows. JSON files hold the same rows as an array of objects under
//! `rows`, next to the provenance fields.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::manifest::Format;

/// Columns of a `simulate` result. Everything but `n` and `alpha` is in
/// units of `ln n / R_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateRow {
    pub n: usize,
    pub alpha: f64,
    pub quantity: String,
    pub scaled_mean: f64,
    pub se: f64,
    pub q05: f64,
    pub q25: f64,
    pub q50: f64,
    pub q75: f64,
    pub q95: f64,
}

/// Columns of a `tau` result: moments of `R_n τ_k - ln k`, its KS test
/// against the standard Gumbel law, and the mean of `τ_k R_n / ln n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TauRow {
    pub n: usize,
    pub alpha: f64,
    pub k: usize,
    pub mean: f64,
    pub se: f64,
    pub ks_statistic: f64,
    pub ks_p_value: f64,
    pub scaled_mean: f64,
    pub scaled_se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantsRow {
    pub d: usize,
    pub p: String,
    pub alpha: f64,
    pub method: String,
    pub value: f64,
    pub error_estimate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidateRow {
    pub check: String,
    pub n: usize,
    pub alpha: f64,
    pub statistic: f64,
    pub p_value: Option<f64>,
    pub threshold: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Rows {
    Simulate(Vec<SimulateRow>),
    Tau(Vec<TauRow>),
    Constants(Vec<ConstantsRow>),
    Validate(Vec<ValidateRow>),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub tool: String,
    pub experiment: String,
    pub kind: String,
    pub root_seed: u64,
    pub wall_time_s: f64,
    pub notes: Vec<String>,
}

impl Provenance {
    fn lines(&self) -> Vec<String> {
        let mut v = vec![
            format!("# tool: {}", self.tool),
            format!("# experiment: {} ({})", self.experiment, self.kind),
            format!("# root_seed: {}", self.root_seed),
            format!("# wall_time_s: {:.3}", self.wall_time_s),
        ];
        v.extend(self.notes.iter().map(|n| format!("# {n}")));
        v
    }
}

fn csv_body<T: Serialize>(rows: &[T], header: &[&str]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(csv::Error::from)?;
    w.into_inner().map_err(|e| CliError::Csv(e.into_error().into()))
}

const SIMULATE_HEADER: &[&str] = &["n", "alpha", "quantity", "scaled_mean", "se", "q05", "q25", "q50", "q75", "q95"];
const TAU_HEADER: &[&str] = &["n", "alpha", "k", "mean", "se", "ks_statistic", "ks_p_value", "scaled_mean", "scaled_se"];
const CONSTANTS_HEADER: &[&str] = &["d", "p", "alpha", "method", "value", "error_estimate"];
const VALIDATE_HEADER: &[&str] = &["check", "n", "alpha", "statistic", "p_value", "threshold", "passed"];

/// The header row and data rows as CSV text.
pub fn rows_csv(rows: &Rows) -> Result<Vec<u8>, CliError> {
    match rows {
        Rows::Simulate(r) => csv_body(r, SIMULATE_HEADER),
        Rows::Tau(r) => csv_body(r, TAU_HEADER),
        Rows::Constants(r) => csv_body(r, CONSTANTS_HEADER),
        Rows::Validate(r) => csv_body(r, VALIDATE_HEADER),
    }
}

fn rows_json(rows: &Rows) -> Result<serde_json::Value, CliError> {
    Ok(match rows {
        Rows::Simulate(r) => serde_json::to_value(r)?,
        Rows::Tau(r) => serde_json::to_value(r)?,
        Rows::Constants(r) => serde_json::to_value(r)?,
        Rows::Validate(r) => serde_json::to_value(r)?,
    })
}

pub fn render(rows: &Rows, prov: &Provenance, format: Format) -> Result<Vec<u8>, CliError> {
    match format {
        Format::Csv => {
            let mut out = Vec::new();
            for line in prov.lines() {
                writeln!(out, "{line}").expect("write to memory");
            }
            out.extend(rows_csv(rows)?);
            Ok(out)
        }
        Format::Json => {
            let mut v = serde_json::to_value(prov)?;
            v["rows"] = rows_json(rows)?;
            let mut out = serde_json::to_vec_pretty(&v)?;
            out.push(b'\n');
            Ok(out)
        }
    }
}

pub fn write_result(dir: &Path, name: &str, rows: &Rows, prov: &Provenance, format: Format) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let path = dir.join(format!("{name}.{}", format.extension()));
    fs::write(&path, render(rows, prov, format)?).map_err(|source| CliError::Io {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

/// Strips provenance lines from CSV output, leaving header and rows.
pub fn csv_rows_only(text: &str) -> String {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| format!("{l}\n"))
        .collect()
}

/// Reads the rows of a CSV result back.
pub fn read_csv_rows<T: for<'de> Deserialize<'de>>(text: &str) -> Result<Vec<T>, CliError> {
    let body = csv_rows_only(text);
    let mut r = csv::Reader::from_reader(body.as_bytes());
    r.deserialize().map(|row| row.map_err(CliError::from)).collect()
}
