use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::run::AggregateResult;
use crate::error::{Error, Result};
use crate::transceivers::SchemeKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    pub fn extension(&self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

/// One line of the results CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub scheme: SchemeKind,
    pub m_rf: usize,
    pub snr_db: f64,
    pub mean_se: f64,
    pub stderr_se: f64,
    pub power_w: f64,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io { path: path.to_path_buf(), source }
}

/// Writes `<dir>/<stem>.<ext>` and returns its path. The JSON form carries
/// the full configuration alongside the aggregates.
pub fn emit_results(res: &AggregateResult, format: OutputFormat, dir: &Path, stem: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let path = dir.join(format!("{stem}.{}", format.extension()));
    let bytes = match format {
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for r in &res.rows {
                w.serialize(ResultRow {
                    scheme: r.scheme,
                    m_rf: r.m_rf,
                    snr_db: r.snr_db,
                    mean_se: r.mean_se,
                    stderr_se: r.stderr_se,
                    power_w: r.power_w,
                })
                .map_err(|e| Error::Format { path: path.clone(), message: e.to_string() })?;
            }
            w.into_inner().map_err(|e| Error::Format { path: path.clone(), message: e.to_string() })?
        }
        OutputFormat::Json => {
            let mut v = serde_json::to_vec_pretty(res).map_err(|e| Error::Format { path: path.clone(), message: e.to_string() })?;
            v.push(b'\n');
            v
        }
    };
    fs::write(&path, bytes).map_err(io_err(&path))?;
    Ok(path)
}

pub fn read_results_json(path: &Path) -> Result<AggregateResult> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|e| Error::Format { path: path.to_path_buf(), message: e.to_string() })
}
