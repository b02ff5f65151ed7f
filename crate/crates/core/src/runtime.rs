//! Worker orchestration: one sequential chain worker plus `C_rej` rejection
//! workers sharing only the read-only region map and a stop flag.

use std::sync::atomic::{AtomicBool, Ordering};
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{MarkovKernel, TargetModel, VariationalModel};
use crate::occlusion::{occlude, occluded_estimate, ChainTrace, OcclusionResult, RestrictedPool};
use crate::partition::RegionMap;
use crate::rejection::rejection_attempt;

/// Stream index of the chain worker. Rejection worker `j` uses `j` (1-based).
pub const CHAIN_STREAM: u64 = 0;
/// Stream index of the postprocessing step.
pub const POSTPROCESS_STREAM: u64 = u64::MAX;

/// How often the chain worker looks at the clock in wall-clock mode.
const CLOCK_POLL: usize = 256;

/// Independent ChaCha stream for `(master_seed, index)`.
pub fn seed_stream(master_seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StopCondition {
    /// The chain runs `n` states; rejection workers run until it finishes.
    ChainLength(usize),
    /// Everybody runs until the budget is spent.
    WallClock(Duration),
    /// The chain runs `chain_steps` states and every rejection worker makes
    /// exactly `attempts_per_worker` attempts. The only reproducible mode.
    FixedAttempts {
        chain_steps: usize,
        attempts_per_worker: u64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// `C_rej`; zero runs the plain chain.
    pub workers: usize,
    pub stop: StopCondition,
    pub seed: u64,
    pub deterministic: bool,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        match self.stop {
            StopCondition::ChainLength(0)
            | StopCondition::FixedAttempts { chain_steps: 0, .. } => {
                return Err(Error::Config("chain length must be at least 1".into()))
            }
            StopCondition::WallClock(d) if d.is_zero() => {
                return Err(Error::Config("wall-clock budget must be positive".into()))
            }
            _ => {}
        }
        if self.deterministic && !matches!(self.stop, StopCondition::FixedAttempts { .. }) {
            return Err(Error::Config(
                "deterministic mode needs fixed chain length and fixed attempts per worker".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub chain_length: usize,
    /// `|T_i|`.
    pub visit_counts: Vec<usize>,
    /// `N_i` after merging.
    pub pool_counts: Vec<usize>,
    pub attempts_per_worker: Vec<u64>,
    pub accepts_per_worker: Vec<u64>,
    /// Realised `min(1, N_i / |T_i|)`; zero for a region without samples.
    pub alpha_hat: Vec<f64>,
    pub elapsed: Duration,
}

impl RunReport {
    pub fn total_attempts(&self) -> u64 {
        self.attempts_per_worker.iter().sum()
    }

    pub fn total_accepts(&self) -> u64 {
        self.accepts_per_worker.iter().sum()
    }

    /// Chain states per second over the whole run.
    pub fn chain_throughput(&self) -> f64 {
        self.chain_length as f64 / self.elapsed.as_secs_f64().max(f64::MIN_POSITIVE)
    }
}

/// What a rejection worker hands back at the end of the run.
#[derive(Debug, Clone)]
pub struct WorkerOutput<S> {
    pub pool: RestrictedPool<S>,
    pub attempts: u64,
    pub accepts: u64,
}

/// The rejection loop. It sees the region map and the stop flag, never the
/// chain. Runs until `limit` attempts (if given) or until `stop` is raised.
pub fn rejection_worker<T, Q>(
    map: &RegionMap<'_, T, Q>,
    stop: &AtomicBool,
    limit: Option<u64>,
    rng: &mut ChaCha8Rng,
) -> Result<WorkerOutput<T::State>>
where
    T: TargetModel,
    Q: VariationalModel<State = T::State>,
{
    let mut pool = RestrictedPool::new(map.region_count());
    let mut attempts = 0u64;
    let mut accepts = 0u64;
    while !stop.load(Ordering::Relaxed) && limit.map_or(true, |l| attempts < l) {
        attempts += 1;
        if let Some((region, y)) = rejection_attempt(map, rng)? {
            pool.push(region, y);
            accepts += 1;
        }
    }
    Ok(WorkerOutput {
        pool,
        attempts,
        accepts,
    })
}

fn run_chain<T, Q, K>(
    kernel: &mut K,
    initial: T::State,
    map: &RegionMap<'_, T, Q>,
    stop: StopCondition,
    rng: &mut ChaCha8Rng,
) -> Result<ChainTrace<T::State>>
where
    T: TargetModel,
    Q: VariationalModel<State = T::State>,
    K: MarkovKernel<T::State>,
{
    let r = map.region_count();
    let mut state = initial;
    match stop {
        StopCondition::ChainLength(n) | StopCondition::FixedAttempts { chain_steps: n, .. } => {
            let mut trace = ChainTrace::with_capacity(r, n);
            for t in 0..n {
                if t > 0 {
                    kernel.step(&mut state, rng);
                }
                let region = map.region_of(&state)?;
                trace.push(state.clone(), region);
            }
            Ok(trace)
        }
        StopCondition::WallClock(budget) => {
            let start = Instant::now();
            let mut trace = ChainTrace::new(r);
            loop {
                if !trace.is_empty() {
                    kernel.step(&mut state, rng);
                }
                let region = map.region_of(&state)?;
                trace.push(state.clone(), region);
                if trace.len() % CLOCK_POLL == 0 && start.elapsed() >= budget {
                    return Ok(trace);
                }
            }
        }
    }
}

/// Runs the chain on the calling thread and `config.workers` rejection
/// workers on scoped threads. Pools are merged in worker-index order.
pub fn orchestrate<T, Q, K>(
    mut kernel: K,
    initial: T::State,
    map: &RegionMap<'_, T, Q>,
    config: &RunConfig,
) -> Result<(ChainTrace<T::State>, RestrictedPool<T::State>, RunReport)>
where
    T: TargetModel,
    Q: VariationalModel<State = T::State>,
    K: MarkovKernel<T::State>,
{
    config.validate()?;
    let stop = AtomicBool::new(false);
    let limit = match config.stop {
        StopCondition::FixedAttempts {
            attempts_per_worker,
            ..
        } => Some(attempts_per_worker),
        _ => None,
    };
    let start = Instant::now();

    let (chain, outputs) = std::thread::scope(|scope| {
        let handles: Vec<_> = (1..=config.workers as u64)
            .map(|j| {
                let stop = &stop;
                let mut rng = seed_stream(config.seed, j);
                scope.spawn(move || rejection_worker(map, stop, limit, &mut rng))
            })
            .collect();

        let mut rng = seed_stream(config.seed, CHAIN_STREAM);
        let chain = run_chain(&mut kernel, initial, map, config.stop, &mut rng);
        if limit.is_none() || chain.is_err() {
            stop.store(true, Ordering::Relaxed);
        }
        let outputs: Vec<_> = handles
            .into_iter()
            .map(|h| h.join().expect("rejection worker panicked"))
            .collect();
        (chain, outputs)
    });
    let elapsed = start.elapsed();
    let trace = chain?;

    let mut pools = RestrictedPool::new(map.region_count());
    let mut attempts_per_worker = Vec::with_capacity(outputs.len());
    let mut accepts_per_worker = Vec::with_capacity(outputs.len());
    for out in outputs {
        let out = out?;
        attempts_per_worker.push(out.attempts);
        accepts_per_worker.push(out.accepts);
        pools.extend(out.pool)?;
    }

    let visit_counts = trace.visit_counts();
    let pool_counts = pools.counts();
    let alpha_hat = visit_counts
        .iter()
        .zip(&pool_counts)
        .map(|(&t, &n)| {
            if n == 0 {
                0.0
            } else {
                (n as f64 / t as f64).min(1.0)
            }
        })
        .collect();
    log::debug!(
        "run finished: n = {}, pools = {:?}, attempts = {}",
        trace.len(),
        pool_counts,
        attempts_per_worker.iter().sum::<u64>()
    );
    let report = RunReport {
        chain_length: trace.len(),
        visit_counts,
        pool_counts,
        attempts_per_worker,
        accepts_per_worker,
        alpha_hat,
        elapsed,
    };
    Ok((trace, pools, report))
}

/// Everything produced by [`run_occlusion`].
#[derive(Debug, Clone)]
pub struct OcclusionRun<S> {
    pub trace: ChainTrace<S>,
    pub pools: RestrictedPool<S>,
    pub result: OcclusionResult<S>,
    pub report: RunReport,
    /// `(1/n) Σ f(X_t)`.
    pub chain_estimate: f64,
}

/// Algorithm 1 end to end: orchestrate, occlude, estimate.
pub fn run_occlusion<T, Q, K, F>(
    kernel: K,
    initial: T::State,
    map: &RegionMap<'_, T, Q>,
    f: F,
    config: &RunConfig,
) -> Result<OcclusionRun<T::State>>
where
    T: TargetModel,
    Q: VariationalModel<State = T::State>,
    K: MarkovKernel<T::State>,
    F: Fn(&T::State) -> f64,
{
    let (trace, pools, report) = orchestrate(kernel, initial, map, config)?;
    let mut rng = seed_stream(config.seed, POSTPROCESS_STREAM);
    let mut result = occlude(&trace, &pools, &mut rng)?;
    result.estimate = Some(occluded_estimate(&f, &result)?);
    let chain_estimate = trace.average(&f)?;
    Ok(OcclusionRun {
        trace,
        pools,
        result,
        report,
        chain_estimate,
    })
}
