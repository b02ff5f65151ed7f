//! Empirical thresholds for the Ising regions: run Wolff from a uniform start,
//! record `ln(dP̃/dQ)` along the way, and cut at the median and the maximum.

use rand::Rng;

use super::{SpinGraph, VariationalIsing, Wolff};
use crate::error::{Error, Result};
use crate::model::MarkovKernel;
use crate::partition::{log_rn_derivative, RegionPartition};

#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    pub partition: RegionPartition,
    /// `ln(dP̃/dQ)` at every visited state, in visiting order.
    pub log_rn: Vec<f64>,
    /// True when the median equalled the maximum and only one cut was used.
    pub degenerate: bool,
}

/// Thresholds `[median, max]` (three regions) from a stored trajectory. The
/// median is the lower middle order statistic. When it coincides with the
/// maximum the partition collapses to the single cut `[max]`.
pub fn calibrate_from_log_rn(log_rn: &[f64]) -> Result<(RegionPartition, bool)> {
    if log_rn.is_empty() {
        return Err(Error::Empty("calibration trajectory"));
    }
    if log_rn.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidState("non-finite value in calibration trajectory".into()));
    }
    let mut sorted = log_rn.to_vec();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[(sorted.len() - 1) / 2];
    let max = *sorted.last().expect("non-empty");
    if median < max {
        Ok((RegionPartition::from_log_thresholds(vec![median, max])?, false))
    } else {
        log::warn!("calibration trajectory has median equal to maximum; using two regions");
        Ok((RegionPartition::from_log_thresholds(vec![max])?, true))
    }
}

pub fn threshold_calibration<R: Rng + ?Sized>(
    graph: &SpinGraph,
    q: &VariationalIsing,
    steps: usize,
    rng: &mut R,
) -> Result<Calibration> {
    if steps == 0 {
        return Err(Error::Config("calibration needs at least one Wolff step".into()));
    }
    let mut state: Vec<i8> = (0..graph.vertex_count())
        .map(|_| if rng.random::<bool>() { 1 } else { -1 })
        .collect();
    let mut kernel = Wolff::new(graph);
    let mut log_rn = Vec::with_capacity(steps);
    for _ in 0..steps {
        kernel.step(&mut state, rng);
        log_rn.push(log_rn_derivative(&state, graph, q)?);
    }
    let (partition, degenerate) = calibrate_from_log_rn(&log_rn)?;
    Ok(Calibration {
        partition,
        log_rn,
        degenerate,
    })
}
