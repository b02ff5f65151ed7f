use petgraph::unionfind::UnionFind;
use rand::Rng;

use super::{SpinConfig, SpinGraph};
use crate::error::{Error, Result};
use crate::model::MarkovKernel;

/// Single-site Metropolis: pick a vertex uniformly, propose flipping it,
/// accept with `min{1, exp(−β ΔU)}` from the local field.
#[derive(Debug, Clone)]
pub struct IsingMetropolis<'a> {
    graph: &'a SpinGraph,
    proposals: u64,
    accepted: u64,
}

impl<'a> IsingMetropolis<'a> {
    pub fn new(graph: &'a SpinGraph) -> Self {
        Self {
            graph,
            proposals: 0,
            accepted: 0,
        }
    }

    pub fn acceptance_rate(&self) -> f64 {
        if self.proposals == 0 {
            0.0
        } else {
            self.accepted as f64 / self.proposals as f64
        }
    }
}

impl MarkovKernel<SpinConfig> for IsingMetropolis<'_> {
    fn step<R: Rng + ?Sized>(&mut self, state: &mut SpinConfig, rng: &mut R) {
        let n = self.graph.vertex_count();
        if n == 0 {
            return;
        }
        let v = rng.random_range(0..n);
        let log_ratio = -self.graph.beta() * self.graph.flip_delta(state, v);
        self.proposals += 1;
        if log_ratio >= 0.0 || rng.random::<f64>().ln() < log_ratio {
            state[v] = -state[v];
            self.accepted += 1;
        }
    }
}

/// Grows a Wolff cluster from `seed`. Every bond between a cluster member and
/// an aligned outsider is tested once, with `coin` deciding whether it opens.
/// Returns `None` as soon as `coin` does, which lets callers enumerate coin
/// sequences exhaustively.
pub fn grow_cluster<F>(graph: &SpinGraph, sigma: &[i8], seed: usize, mut coin: F) -> Option<Vec<usize>>
where
    F: FnMut() -> Option<bool>,
{
    let s = sigma[seed];
    let mut in_cluster = vec![false; graph.vertex_count()];
    in_cluster[seed] = true;
    let mut cluster = vec![seed];
    let mut stack = vec![seed];
    while let Some(u) = stack.pop() {
        for &v in graph.neighbours(u) {
            if !in_cluster[v] && sigma[v] == s && coin()? {
                in_cluster[v] = true;
                cluster.push(v);
                stack.push(v);
            }
        }
    }
    Some(cluster)
}

/// Wolff cluster flip with bond probability [`SpinGraph::bond_probability`].
#[derive(Debug, Clone)]
pub struct Wolff<'a> {
    graph: &'a SpinGraph,
    p_bond: f64,
    flipped: u64,
    steps: u64,
}

impl<'a> Wolff<'a> {
    pub fn new(graph: &'a SpinGraph) -> Self {
        Self {
            graph,
            p_bond: graph.bond_probability(),
            flipped: 0,
            steps: 0,
        }
    }

    pub fn mean_cluster_size(&self) -> f64 {
        if self.steps == 0 {
            0.0
        } else {
            self.flipped as f64 / self.steps as f64
        }
    }
}

impl MarkovKernel<SpinConfig> for Wolff<'_> {
    fn step<R: Rng + ?Sized>(&mut self, state: &mut SpinConfig, rng: &mut R) {
        let n = self.graph.vertex_count();
        if n == 0 {
            return;
        }
        let seed = rng.random_range(0..n);
        let p = self.p_bond;
        let cluster = grow_cluster(self.graph, state, seed, || Some(rng.random::<f64>() < p))
            .expect("random coin never aborts");
        for &v in &cluster {
            state[v] = -state[v];
        }
        self.steps += 1;
        self.flipped += cluster.len() as u64;
    }
}

/// Swendsen–Wang: open each aligned edge with the bond probability, then give
/// every connected component an independent uniform spin.
#[derive(Debug, Clone)]
pub struct SwendsenWang<'a> {
    graph: &'a SpinGraph,
    p_bond: f64,
}

impl<'a> SwendsenWang<'a> {
    pub fn new(graph: &'a SpinGraph) -> Self {
        Self {
            graph,
            p_bond: graph.bond_probability(),
        }
    }
}

impl MarkovKernel<SpinConfig> for SwendsenWang<'_> {
    fn step<R: Rng + ?Sized>(&mut self, state: &mut SpinConfig, rng: &mut R) {
        let n = self.graph.vertex_count();
        let mut uf = UnionFind::<usize>::new(n);
        for &(u, v) in self.graph.edges() {
            if state[u] == state[v] && rng.random::<f64>() < self.p_bond {
                uf.union(u, v);
            }
        }
        let roots = uf.into_labeling();
        let mut label = vec![0i8; n];
        for v in 0..n {
            let r = roots[v];
            if label[r] == 0 {
                label[r] = if rng.random::<bool>() { 1 } else { -1 };
            }
            state[v] = label[r];
        }
    }
}

/// `⌈log2(1/target)⌉` halving blocks, at least one.
pub fn swendsen_wang_blocks(target: f64) -> Result<usize> {
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::Config(format!(
            "uncoupled probability target {target} must lie in (0, 1)"
        )));
    }
    Ok(((1.0 / target).log2().ceil() as usize).max(1))
}

/// Burn-in from a uniform start: `blocks × block_length` Swendsen–Wang steps,
/// where `block_length` defaults to `10 N` (one step when `β = 0`, which
/// already gives an exact draw). Returns the state and the step count.
pub fn swendsen_wang_init<R: Rng + ?Sized>(
    graph: &SpinGraph,
    target: f64,
    block_length: Option<usize>,
    rng: &mut R,
) -> Result<(SpinConfig, usize)> {
    let blocks = swendsen_wang_blocks(target)?;
    let l = match block_length {
        Some(0) => return Err(Error::Config("block length must be positive".into())),
        Some(l) => l,
        None if graph.beta() == 0.0 => 1,
        None => 10 * graph.vertex_count().max(1),
    };
    let mut state: SpinConfig = (0..graph.vertex_count())
        .map(|_| if rng.random::<bool>() { 1 } else { -1 })
        .collect();
    let mut kernel = SwendsenWang::new(graph);
    let steps = blocks * l;
    for _ in 0..steps {
        kernel.step(&mut state, rng);
    }
    Ok((state, steps))
}
