//! CSV and JSON output.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use ogaprox::{MetricRecord, RunReport};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

/// `git describe`-style version baked in at build time.
pub const VERSION: &str = env!("OGAPROX_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Serialize)]
struct CsvRow {
    k: usize,
    gap: Option<f64>,
    dist_x: Option<f64>,
    dist_y: Option<f64>,
    tsa: Option<f64>,
    theta: f64,
    tau: f64,
    sigma: f64,
}

impl From<&MetricRecord> for CsvRow {
    fn from(r: &MetricRecord) -> Self {
        CsvRow { k: r.k, gap: r.gap, dist_x: r.dist_x, dist_y: r.dist_y, tsa: r.tsa, theta: r.theta, tau: r.tau, sigma: r.sigma }
    }
}

pub const CSV_HEADER: &str = "k,gap,dist_x,dist_y,tsa,theta,tau,sigma";

/// One labelled sequence of records, e.g. one schedule or one group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub name: String,
    pub records: Vec<MetricRecord>,
}

impl Series {
    pub fn new(name: impl Into<String>, report: RunReport) -> Self {
        Series { name: name.into(), records: report.records }
    }

    pub fn report(&self) -> RunReport {
        RunReport { records: self.records.clone() }
    }

    pub fn at(&self, k: usize) -> Option<&MetricRecord> {
        self.records.iter().find(|r| r.k == k)
    }
}

/// Everything one CLI verb produces.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentOutput {
    pub experiment: String,
    pub version: String,
    pub seed: u64,
    pub config: serde_json::Value,
    pub series: Vec<Series>,
    /// Experiment-specific aggregates.
    pub summary: serde_json::Value,
}

impl ExperimentOutput {
    pub fn series(&self, name: &str) -> Option<&Series> {
        self.series.iter().find(|s| s.name == name)
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    }
    Ok(BufWriter::new(File::create(path).map_err(|e| HarnessError::io(path, e))?))
}

pub fn write_csv<W: Write>(report: &RunReport, w: W) -> csv::Result<()> {
    let mut wr = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    wr.write_record(CSV_HEADER.split(','))?;
    for r in &report.records {
        wr.serialize(CsvRow::from(r))?;
    }
    wr.flush()?;
    Ok(())
}

/// Writes `report` as CSV, or as JSON with a version stamp and optional config echo.
pub fn emit_report(report: &RunReport, format: Format, path: &Path, config: Option<&serde_json::Value>) -> Result<()> {
    let mut w = create(path)?;
    match format {
        Format::Csv => write_csv(report, &mut w).map_err(|e| HarnessError::Csv { path: path.into(), source: e })?,
        Format::Json => {
            let doc = serde_json::json!({ "version": VERSION, "config": config, "records": report.records });
            serde_json::to_writer_pretty(&mut w, &doc).map_err(|e| HarnessError::Json { path: path.into(), source: e })?;
        }
    }
    w.flush().map_err(|e| HarnessError::io(path, e))
}

/// `<dir>/<experiment>_<series>.csv` per series and `<dir>/<experiment>.json`.
pub fn write_outputs(dir: &Path, out: &ExperimentOutput) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    for s in &out.series {
        let path = dir.join(format!("{}_{}.csv", out.experiment, s.name));
        emit_report(&s.report(), Format::Csv, &path, None)?;
        written.push(path);
    }
    let path = dir.join(format!("{}.json", out.experiment));
    let mut w = create(&path)?;
    serde_json::to_writer_pretty(&mut w, out).map_err(|e| HarnessError::Json { path: path.clone(), source: e })?;
    w.flush().map_err(|e| HarnessError::io(&path, e))?;
    written.push(path);
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_report_is_header_only() {
        let mut buf = Vec::new();
        write_csv(&RunReport::default(), &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), format!("{CSV_HEADER}\n"));
    }
}
