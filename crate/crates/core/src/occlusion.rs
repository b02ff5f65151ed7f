//! Postprocessing: replacing chain states with restricted samples and the
//! occluded estimator.
//!
//! For each region `i` the chain visits at times `T_i` (with `|T_i|` visits)
//! and the rejection workers produced `N_i` samples. If `N_i ≥ |T_i|` every
//! visit is occluded; otherwise a uniformly random size-`N_i` subset of the
//! visit times is. Pool entries are assigned to the selected times in pool
//! order against ascending time. Pool entries are conditionally i.i.d. given
//! the counts, so any fixed assignment has the same law; surplus entries are
//! left unused.

use rand::seq::index;
use rand::Rng;

use crate::error::{Error, Result};

/// The recorded Markov chain `X_1..X_n` with the region of every state.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainTrace<S> {
    states: Vec<S>,
    regions: Vec<usize>,
    region_count: usize,
}

impl<S> ChainTrace<S> {
    pub fn new(region_count: usize) -> Self {
        Self {
            states: Vec::new(),
            regions: Vec::new(),
            region_count,
        }
    }

    pub fn with_capacity(region_count: usize, capacity: usize) -> Self {
        Self {
            states: Vec::with_capacity(capacity),
            regions: Vec::with_capacity(capacity),
            region_count,
        }
    }

    /// Builds a trace from already classified states.
    pub fn from_parts(states: Vec<S>, regions: Vec<usize>, region_count: usize) -> Result<Self> {
        if states.len() != regions.len() {
            return Err(Error::Consistency(format!(
                "{} states but {} region labels",
                states.len(),
                regions.len()
            )));
        }
        if let Some(&r) = regions.iter().find(|&&r| r >= region_count) {
            return Err(Error::Consistency(format!(
                "region label {r} out of range for {region_count} regions"
            )));
        }
        Ok(Self {
            states,
            regions,
            region_count,
        })
    }

    pub fn push(&mut self, state: S, region: usize) {
        debug_assert!(region < self.region_count);
        self.states.push(state);
        self.regions.push(region);
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[S] {
        &self.states
    }

    pub fn regions(&self) -> &[usize] {
        &self.regions
    }

    pub fn region_count(&self) -> usize {
        self.region_count
    }

    /// `|T_i|` for every region.
    pub fn visit_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.region_count];
        for &r in &self.regions {
            counts[r] += 1;
        }
        counts
    }

    /// Ascending visit times of every region.
    pub fn visit_times(&self) -> Vec<Vec<usize>> {
        let mut times = vec![Vec::new(); self.region_count];
        for (t, &r) in self.regions.iter().enumerate() {
            times[r].push(t);
        }
        times
    }

    /// `(1/n) Σ f(X_t)`.
    pub fn average<F: Fn(&S) -> f64>(&self, f: F) -> Result<f64> {
        if self.states.is_empty() {
            return Err(Error::Empty("chain trace"));
        }
        let sum: f64 = self.states.iter().map(f).sum();
        Ok(sum / self.states.len() as f64)
    }
}

/// Restricted samples `{Y_ij}` grouped by region.
#[derive(Debug, Clone, PartialEq)]
pub struct RestrictedPool<S> {
    pools: Vec<Vec<S>>,
}

impl<S> RestrictedPool<S> {
    pub fn new(region_count: usize) -> Self {
        Self {
            pools: (0..region_count).map(|_| Vec::new()).collect(),
        }
    }

    pub fn from_regions(pools: Vec<Vec<S>>) -> Self {
        Self { pools }
    }

    pub fn push(&mut self, region: usize, state: S) {
        self.pools[region].push(state);
    }

    /// Appends every entry of `other`, region by region.
    pub fn extend(&mut self, other: RestrictedPool<S>) -> Result<()> {
        if other.pools.len() != self.pools.len() {
            return Err(Error::Consistency(format!(
                "cannot merge a pool with {} regions into one with {}",
                other.pools.len(),
                self.pools.len()
            )));
        }
        for (mine, theirs) in self.pools.iter_mut().zip(other.pools) {
            mine.extend(theirs);
        }
        Ok(())
    }

    pub fn region_count(&self) -> usize {
        self.pools.len()
    }

    pub fn region(&self, i: usize) -> &[S] {
        &self.pools[i]
    }

    /// `N_i` for every region.
    pub fn counts(&self) -> Vec<usize> {
        self.pools.iter().map(Vec::len).collect()
    }

    pub fn total(&self) -> usize {
        self.pools.iter().map(Vec::len).sum()
    }

    /// Checks every stored entry against `classify`.
    pub fn check_membership<F>(&self, mut classify: F) -> Result<()>
    where
        F: FnMut(&S) -> Result<usize>,
    {
        for (i, pool) in self.pools.iter().enumerate() {
            for (j, y) in pool.iter().enumerate() {
                let r = classify(y)?;
                if r != i {
                    return Err(Error::Consistency(format!(
                        "pool entry {j} of region {i} belongs to region {r}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Which visit times of each region are occluded, ascending within a region.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OcclusionPlan {
    pub selected: Vec<Vec<usize>>,
}

/// Draws the occluded visit times: all of `T_i` when the pool is large enough,
/// otherwise a uniform size-`N_i` subset.
pub fn plan_occlusion<S, R: Rng + ?Sized>(
    trace: &ChainTrace<S>,
    pool_counts: &[usize],
    rng: &mut R,
) -> Result<OcclusionPlan> {
    if pool_counts.len() != trace.region_count() {
        return Err(Error::Consistency(format!(
            "trace has {} regions, pools have {}",
            trace.region_count(),
            pool_counts.len()
        )));
    }
    let selected = trace
        .visit_times()
        .into_iter()
        .zip(pool_counts)
        .map(|(times, &available)| {
            if available >= times.len() {
                times
            } else {
                let mut picks: Vec<usize> = index::sample(rng, times.len(), available)
                    .into_iter()
                    .map(|k| times[k])
                    .collect();
                picks.sort_unstable();
                picks
            }
        })
        .collect();
    Ok(OcclusionPlan { selected })
}

/// Indicators `S_t`, occluded states `Z_t` and the proportion diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct OcclusionResult<S> {
    pub indicators: Vec<bool>,
    pub occluded_states: Vec<S>,
    /// `Σ_i min(N_i, |T_i|) / n`, always in `[0, 1]`.
    pub occlusion_proportion: f64,
    /// `Σ_i N_i / n`, which can exceed 1.
    pub raw_pool_ratio: f64,
    pub estimate: Option<f64>,
}

/// Builds `S_t` and `Z_t` from a plan.
pub fn apply_plan<S: Clone>(
    trace: &ChainTrace<S>,
    pools: &RestrictedPool<S>,
    plan: &OcclusionPlan,
) -> Result<OcclusionResult<S>> {
    if pools.region_count() != trace.region_count() || plan.selected.len() != trace.region_count()
    {
        return Err(Error::Consistency(
            "trace, pools and plan disagree on the number of regions".into(),
        ));
    }
    let n = trace.len();
    let mut indicators = vec![false; n];
    let mut occluded_states = trace.states().to_vec();
    let mut used = 0usize;
    for (i, times) in plan.selected.iter().enumerate() {
        let pool = pools.region(i);
        if times.len() > pool.len() {
            return Err(Error::Consistency(format!(
                "plan occludes {} times in region {i} but only {} samples exist",
                times.len(),
                pool.len()
            )));
        }
        for (&t, y) in times.iter().zip(pool) {
            if t >= n || trace.regions()[t] != i {
                return Err(Error::Consistency(format!(
                    "time {t} is not a visit to region {i}"
                )));
            }
            if indicators[t] {
                return Err(Error::Consistency(format!("time {t} selected twice")));
            }
            indicators[t] = true;
            occluded_states[t] = y.clone();
        }
        used += times.len();
    }
    let (occlusion_proportion, raw_pool_ratio) = if n == 0 {
        (0.0, 0.0)
    } else {
        (used as f64 / n as f64, pools.total() as f64 / n as f64)
    };
    Ok(OcclusionResult {
        indicators,
        occluded_states,
        occlusion_proportion,
        raw_pool_ratio,
        estimate: None,
    })
}

/// Plans and applies the occlusion in one go.
pub fn occlude<S: Clone, R: Rng + ?Sized>(
    trace: &ChainTrace<S>,
    pools: &RestrictedPool<S>,
    rng: &mut R,
) -> Result<OcclusionResult<S>> {
    let plan = plan_occlusion(trace, &pools.counts(), rng)?;
    apply_plan(trace, pools, &plan)
}

/// Like [`occlude`], first verifying that every pool entry lies in its region.
pub fn occlude_checked<S, R, F>(
    trace: &ChainTrace<S>,
    pools: &RestrictedPool<S>,
    classify: F,
    rng: &mut R,
) -> Result<OcclusionResult<S>>
where
    S: Clone,
    R: Rng + ?Sized,
    F: FnMut(&S) -> Result<usize>,
{
    pools.check_membership(classify)?;
    occlude(trace, pools, rng)
}

/// `(1/n) Σ_t f(Z_t)`.
pub fn occluded_estimate<S, F: Fn(&S) -> f64>(f: F, result: &OcclusionResult<S>) -> Result<f64> {
    if result.occluded_states.is_empty() {
        return Err(Error::Empty("occluded trace"));
    }
    let sum: f64 = result.occluded_states.iter().map(f).sum();
    Ok(sum / result.occluded_states.len() as f64)
}

/// The fully occluded estimator: every visit to region `i` uses one pool
/// sample, so it needs `N_i ≥ |T_i|` everywhere. Pool entries are consumed in
/// order, summed in time order.
pub fn ideal_estimate<S, F: Fn(&S) -> f64>(
    f: F,
    trace: &ChainTrace<S>,
    pools: &RestrictedPool<S>,
) -> Result<f64> {
    if trace.is_empty() {
        return Err(Error::Empty("chain trace"));
    }
    if pools.region_count() != trace.region_count() {
        return Err(Error::Consistency("pool and trace region counts differ".into()));
    }
    let mut next = vec![0usize; trace.region_count()];
    let mut sum = 0.0;
    for &r in trace.regions() {
        let y = pools.region(r).get(next[r]).ok_or_else(|| {
            Error::Consistency(format!("region {r} has too few samples for the ideal estimator"))
        })?;
        next[r] += 1;
        sum += f(y);
    }
    Ok(sum / trace.len() as f64)
}
