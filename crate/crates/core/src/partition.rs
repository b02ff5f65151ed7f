//! Regions of the state space defined by thresholds on the Radon–Nikodym
//! derivative `dP̃/dQ̃`.
//!
//! With thresholds `0 = C_0 < C_1 < … < C_{R-1} < C_R = ∞`, region `i`
//! (0-based here) holds every state whose derivative lies in `[C_i, C_{i+1})`.
//! Intervals are closed on the left and open on the right everywhere. All
//! comparisons happen in log space so targets with huge unnormalised densities
//! (the Ising model at low temperature) never overflow.

use crate::error::{Error, Result};
use crate::model::{TargetModel, VariationalModel};

#[derive(Debug, Clone, PartialEq)]
pub struct RegionPartition {
    log_thresholds: Vec<f64>,
}

impl RegionPartition {
    /// Partition from strictly increasing, strictly positive, finite thresholds
    /// `C_1 < … < C_{R-1}`. An empty list gives the trivial partition.
    pub fn new(thresholds: &[f64]) -> Result<Self> {
        for &c in thresholds {
            if !(c.is_finite() && c > 0.0) {
                return Err(Error::Config(format!(
                    "threshold {c} must be finite and strictly positive"
                )));
            }
        }
        Self::from_log_thresholds(thresholds.iter().map(|c| c.ln()).collect())
    }

    /// Partition from `ln C_1 < … < ln C_{R-1}`.
    pub fn from_log_thresholds(log_thresholds: Vec<f64>) -> Result<Self> {
        if log_thresholds.iter().any(|c| !c.is_finite()) {
            return Err(Error::Config("log thresholds must be finite".into()));
        }
        if log_thresholds.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config(format!(
                "thresholds must be strictly increasing, got {log_thresholds:?} (log scale)"
            )));
        }
        Ok(Self { log_thresholds })
    }

    /// The single-region partition `{X}`.
    pub fn trivial() -> Self {
        Self {
            log_thresholds: Vec::new(),
        }
    }

    pub fn region_count(&self) -> usize {
        self.log_thresholds.len() + 1
    }

    pub fn log_thresholds(&self) -> &[f64] {
        &self.log_thresholds
    }

    /// `C_1, …, C_{R-1}` on the linear scale (may overflow to `inf` for
    /// partitions built from very large log thresholds).
    pub fn thresholds(&self) -> Vec<f64> {
        self.log_thresholds.iter().map(|c| c.exp()).collect()
    }

    /// Log of the right endpoint of region `region`; `+inf` for the last one.
    pub fn log_upper(&self, region: usize) -> f64 {
        self.log_thresholds
            .get(region)
            .copied()
            .unwrap_or(f64::INFINITY)
    }

    /// Region of a derivative value given on the linear scale.
    pub fn region_index(&self, rn_value: f64) -> Result<usize> {
        if rn_value.is_nan() {
            return Err(Error::InvalidState("Radon-Nikodym value is NaN".into()));
        }
        if rn_value < 0.0 {
            return Err(Error::InvalidState(format!(
                "Radon-Nikodym value {rn_value} is negative"
            )));
        }
        self.region_index_log(rn_value.ln())
    }

    /// Region of a derivative value given as `ln(dP̃/dQ̃)`; `-inf` is allowed
    /// (derivative zero) and so is `+inf`.
    pub fn region_index_log(&self, log_rn: f64) -> Result<usize> {
        if log_rn.is_nan() {
            return Err(Error::InvalidState("log Radon-Nikodym value is NaN".into()));
        }
        // number of thresholds <= log_rn
        Ok(self.log_thresholds.partition_point(|&c| c <= log_rn))
    }
}

/// `log P̃(x) − log Q̃(x)`.
pub fn log_rn_derivative<T, Q>(state: &T::State, target: &T, q: &Q) -> Result<f64>
where
    T: TargetModel,
    Q: VariationalModel<State = T::State>,
{
    let lp = target.log_density(state);
    let lq = q.log_density(state);
    if !lp.is_finite() || !lq.is_finite() {
        return Err(Error::InvalidState(format!(
            "non-finite log-density (target {lp}, proposal {lq})"
        )));
    }
    Ok(lp - lq)
}

/// Target, proposal and partition bundled together: everything needed to
/// classify a state. Shared read-only by the chain and every rejection worker.
#[derive(Debug, Clone, Copy)]
pub struct RegionMap<'a, T, Q> {
    pub target: &'a T,
    pub proposal: &'a Q,
    pub partition: &'a RegionPartition,
}

impl<'a, T, Q> RegionMap<'a, T, Q>
where
    T: TargetModel,
    Q: VariationalModel<State = T::State>,
{
    pub fn new(target: &'a T, proposal: &'a Q, partition: &'a RegionPartition) -> Self {
        Self {
            target,
            proposal,
            partition,
        }
    }

    pub fn log_rn(&self, state: &T::State) -> Result<f64> {
        log_rn_derivative(state, self.target, self.proposal)
    }

    pub fn region_of(&self, state: &T::State) -> Result<usize> {
        self.partition.region_index_log(self.log_rn(state)?)
    }

    pub fn region_count(&self) -> usize {
        self.partition.region_count()
    }
}
