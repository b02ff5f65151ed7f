//! CSV schemas shared with the plotting scripts. Empty fields mean "not
//! applicable" (a GMM row has no `k`, an Ising row has no `d`).

use std::fs::File;
use std::io::Read;
use std::path::{Path, PathBuf};

use occlusion_core::ising::{write_edge_list, EdgeList};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const SUMMARY_HEADER: &[&str] = &[
    "experiment",
    "replication",
    "estimator",
    "kernel",
    "d",
    "n",
    "k",
    "beta",
    "estimate",
    "lag1_acf",
    "occlusion_proportion",
    "raw_pool_ratio",
    "chain_length",
    "elapsed_seconds",
];

pub const TRACE_HEADER: &[&str] = &["t", "region", "f_x", "s", "f_z"];

pub const ACF_HEADER: &[&str] = &[
    "lag",
    "acf_chain",
    "acf_occluded",
    "chain_degenerate",
    "occluded_degenerate",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Estimator {
    Chain,
    Occluded,
}

/// One row per replication and estimator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub experiment: String,
    pub replication: usize,
    pub estimator: Estimator,
    pub kernel: String,
    pub d: Option<usize>,
    pub n: Option<usize>,
    pub k: Option<usize>,
    pub beta: Option<f64>,
    pub estimate: f64,
    /// Empty when the series was constant.
    pub lag1_acf: Option<f64>,
    /// Empty on chain rows.
    pub occlusion_proportion: Option<f64>,
    pub raw_pool_ratio: Option<f64>,
    pub chain_length: usize,
    /// Empty in deterministic mode so the file is reproducible.
    pub elapsed_seconds: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub t: usize,
    pub region: usize,
    pub f_x: f64,
    pub s: u8,
    pub f_z: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AcfRow {
    pub lag: usize,
    pub acf_chain: f64,
    pub acf_occluded: f64,
    pub chain_degenerate: u8,
    pub occluded_degenerate: u8,
}

/// Everything one experiment command produces.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExperimentOutput {
    pub summary: Vec<SummaryRow>,
    /// `(file stem, rows)`, written as `trace_<stem>.csv`.
    pub traces: Vec<(String, Vec<TraceRow>)>,
    /// `(file stem, graph)`, written as `graph_<stem>.txt`.
    pub graphs: Vec<(String, EdgeList)>,
}

pub fn write_rows<T: Serialize>(path: &Path, header: &[&str], rows: &[T]) -> CliResult<()> {
    let csv_err = |source| CliError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(csv_err)?;
    // explicit header so an empty file still carries the schema
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.serialize(row).map_err(csv_err)?;
    }
    w.flush().map_err(|source| CliError::Write {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes `summary.csv`, every trace and every graph into `dir`, returning
/// the paths.
pub fn write_experiment(dir: &Path, out: &ExperimentOutput) -> CliResult<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Write {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut written = Vec::with_capacity(1 + out.traces.len());
    let summary = dir.join("summary.csv");
    write_rows(&summary, SUMMARY_HEADER, &out.summary)?;
    written.push(summary);
    for (stem, rows) in &out.traces {
        let path = dir.join(format!("trace_{stem}.csv"));
        write_rows(&path, TRACE_HEADER, rows)?;
        written.push(path);
    }
    for (stem, graph) in &out.graphs {
        let path = dir.join(format!("graph_{stem}.txt"));
        let file = File::create(&path).map_err(|source| CliError::Write {
            path: path.clone(),
            source,
        })?;
        write_edge_list(file, graph)?;
        written.push(path);
    }
    Ok(written)
}

/// Reads the `f_x` and `f_z` columns of a trace file. Errors name the line.
pub fn read_trace(path: &Path) -> CliResult<(Vec<f64>, Vec<f64>)> {
    let mut text = String::new();
    File::open(path)
        .and_then(|mut f| f.read_to_string(&mut text))
        .map_err(|source| CliError::Read {
            path: path.to_path_buf(),
            source,
        })?;
    parse_trace(path, text.as_bytes())
}

fn parse_trace(path: &Path, bytes: &[u8]) -> CliResult<(Vec<f64>, Vec<f64>)> {
    let parse = |line: u64, message: String| CliError::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut r = csv::Reader::from_reader(bytes);
    let headers = r.headers().map_err(|e| parse(1, e.to_string()))?.clone();
    for col in TRACE_HEADER {
        if !headers.iter().any(|h| h == *col) {
            return Err(parse(1, format!("missing column `{col}`")));
        }
    }
    let mut fx = Vec::new();
    let mut fz = Vec::new();
    for row in r.deserialize::<TraceRow>() {
        let row = row.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            let message = match e.kind() {
                csv::ErrorKind::Deserialize { err, .. } => err.to_string(),
                _ => e.to_string(),
            };
            parse(line, message)
        })?;
        fx.push(row.f_x);
        fz.push(row.f_z);
    }
    if fx.is_empty() {
        return Err(parse(1, "trace has no rows".into()));
    }
    Ok((fx, fz))
}
