use std::path::{Path, PathBuf};

use occlusion_core::acf;

use crate::error::{CliError, CliResult};
use crate::output::{read_trace, write_rows, AcfRow, ACF_HEADER};

/// ACF of the chain (`f_x`) and occluded (`f_z`) columns, lags `0..=max_lag`.
pub fn acf_rows(fx: &[f64], fz: &[f64], max_lag: usize) -> CliResult<Vec<AcfRow>> {
    if fx.len() <= max_lag {
        return Err(CliError::Config(format!(
            "trace has {} rows, too few for max lag {max_lag}",
            fx.len()
        )));
    }
    let chain = acf(fx, max_lag)?;
    let occluded = acf(fz, max_lag)?;
    Ok((0..=max_lag)
        .map(|lag| AcfRow {
            lag,
            acf_chain: chain.values[lag],
            acf_occluded: occluded.values[lag],
            chain_degenerate: chain.degenerate as u8,
            occluded_degenerate: occluded.degenerate as u8,
        })
        .collect())
}

/// Reads a trace file and writes `acf.csv` into `out`.
pub fn run(trace: &Path, max_lag: usize, out: &Path) -> CliResult<PathBuf> {
    let (fx, fz) = read_trace(trace)?;
    let rows = acf_rows(&fx, &fz, max_lag)?;
    std::fs::create_dir_all(out).map_err(|source| CliError::Write {
        path: out.to_path_buf(),
        source,
    })?;
    let path = out.join("acf.csv");
    write_rows(&path, ACF_HEADER, &rows)?;
    Ok(path)
}
