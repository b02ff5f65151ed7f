//! Plumbing shared by the two studies: seed derivation, run settings and
//! turning an [`OcclusionRun`] into summary and trace rows.

use std::time::Duration;

use occlusion_core::{acf, seed_stream, OcclusionRun, RunConfig, StopCondition};
use rand::Rng;

use crate::config::ExperimentConfig;
use crate::error::CliResult;
use crate::output::{Estimator, SummaryRow, TraceRow};

/// Stream reserved for drawing a replication's initial state. Streams
/// `0..=C_rej` and `u64::MAX` belong to the orchestrator.
pub(crate) const INIT_STREAM: u64 = u64::MAX - 1;

/// A seed for the node `path` in the tree rooted at `master`.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(master, |seed, &i| seed_stream(seed, i).random::<u64>())
}

pub(crate) fn run_config(cfg: &ExperimentConfig, seed: u64) -> RunConfig {
    let stop = if cfg.deterministic {
        StopCondition::FixedAttempts {
            chain_steps: cfg.run.steps,
            attempts_per_worker: cfg.attempts_per_worker(),
        }
    } else if let Some(s) = cfg.run.seconds {
        StopCondition::WallClock(Duration::from_secs_f64(s))
    } else {
        StopCondition::ChainLength(cfg.run.steps)
    };
    RunConfig {
        workers: cfg.run.workers,
        stop,
        seed,
        deterministic: cfg.deterministic,
    }
}

/// Statistics of one replication, before labelling.
#[derive(Debug, Clone, PartialEq)]
pub struct Replication {
    pub chain_estimate: f64,
    pub occluded_estimate: f64,
    pub chain_lag1: Option<f64>,
    pub occluded_lag1: Option<f64>,
    pub occlusion_proportion: f64,
    pub raw_pool_ratio: f64,
    pub chain_length: usize,
    pub elapsed: Option<f64>,
    pub trace: Option<Vec<TraceRow>>,
}

fn lag1(series: &[f64]) -> CliResult<Option<f64>> {
    if series.len() < 2 {
        return Ok(None);
    }
    let r = acf(series, 1)?;
    Ok(if r.degenerate { None } else { r.lag(1) })
}

pub(crate) fn summarise<S, F: Fn(&S) -> f64>(
    run: &OcclusionRun<S>,
    f: F,
    deterministic: bool,
    keep_trace: bool,
) -> CliResult<Replication> {
    let fx: Vec<f64> = run.trace.states().iter().map(&f).collect();
    let fz: Vec<f64> = run.result.occluded_states.iter().map(&f).collect();
    let trace = keep_trace.then(|| {
        (0..fx.len())
            .map(|t| TraceRow {
                t,
                region: run.trace.regions()[t],
                f_x: fx[t],
                s: run.result.indicators[t] as u8,
                f_z: fz[t],
            })
            .collect()
    });
    let occluded_estimate = run.result.estimate.ok_or_else(|| {
        occlusion_core::Error::Consistency("occluded estimate missing from run".into())
    })?;
    Ok(Replication {
        chain_estimate: run.chain_estimate,
        occluded_estimate,
        chain_lag1: lag1(&fx)?,
        occluded_lag1: lag1(&fz)?,
        occlusion_proportion: run.result.occlusion_proportion,
        raw_pool_ratio: run.result.raw_pool_ratio,
        chain_length: run.trace.len(),
        elapsed: (!deterministic).then(|| run.report.elapsed.as_secs_f64()),
        trace,
    })
}

/// Identifies a cell of an experiment grid in the summary file.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct CellLabel {
    pub experiment: &'static str,
    pub kernel: &'static str,
    pub d: Option<usize>,
    pub n: Option<usize>,
    pub k: Option<usize>,
    pub beta: Option<f64>,
}

impl CellLabel {
    pub fn rows(&self, replication: usize, r: &Replication) -> [SummaryRow; 2] {
        let row = |estimator, estimate, lag1_acf, prop: Option<f64>, ratio: Option<f64>| SummaryRow {
            experiment: self.experiment.into(),
            replication,
            estimator,
            kernel: self.kernel.into(),
            d: self.d,
            n: self.n,
            k: self.k,
            beta: self.beta,
            estimate,
            lag1_acf,
            occlusion_proportion: prop,
            raw_pool_ratio: ratio,
            chain_length: r.chain_length,
            elapsed_seconds: r.elapsed,
        };
        [
            row(Estimator::Chain, r.chain_estimate, r.chain_lag1, None, None),
            row(
                Estimator::Occluded,
                r.occluded_estimate,
                r.occluded_lag1,
                Some(r.occlusion_proportion),
                Some(r.raw_pool_ratio),
            ),
        ]
    }
}

/// Runs `count` replications, in order or on scoped threads. The result is
/// the same either way because every replication owns its seed.
pub(crate) fn replicate<F>(count: usize, parallel: bool, job: F) -> CliResult<Vec<Replication>>
where
    F: Fn(usize) -> CliResult<Replication> + Sync,
{
    if !parallel {
        return (0..count).map(&job).collect();
    }
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..count)
            .map(|r| {
                let job = &job;
                scope.spawn(move || job(r))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("replication thread panicked"))
            .collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_seeds_differ_by_path() {
        let a = derive_seed(1, &[0, 0]);
        assert_eq!(a, derive_seed(1, &[0, 0]));
        assert_ne!(a, derive_seed(1, &[0, 1]));
        assert_ne!(a, derive_seed(1, &[1, 0]));
        assert_ne!(a, derive_seed(2, &[0, 0]));
    }
}
