//! Ising model on an arbitrary graph: `P(σ) ∝ exp(−β U(σ))` with
//! `U(σ) = −Σ_i Σ_{j ∈ S_i} J σ_i σ_j`, a double sum that counts every
//! undirected edge twice.

mod calibration;
mod exact;
mod io;
mod kernels;
mod sbm;
mod variational;

use crate::error::{Error, Result};
use crate::model::{StateSpace, TargetModel};

pub use calibration::{calibrate_from_log_rn, threshold_calibration, Calibration};
pub use exact::{
    all_configs, config_from_index, config_index, exact_distribution, exact_magnetisation,
    metropolis_matrix, wolff_matrix, MAX_EXACT_VERTICES,
};
pub use io::{read_edge_list, write_edge_list, EdgeList};
pub use kernels::{
    grow_cluster, swendsen_wang_blocks, swendsen_wang_init, IsingMetropolis, SwendsenWang, Wolff,
};
pub use sbm::{community_sizes, random_composition, sbm_graph, SbmParams};
pub use variational::{ClusterGraph, VariationalIsing, MAX_CLUSTERS};

/// Spins in `{−1, +1}`.
pub type SpinConfig = Vec<i8>;

#[derive(Debug, Clone, PartialEq)]
pub struct SpinGraph {
    n: usize,
    edges: Vec<(usize, usize)>,
    neighbours: Vec<Vec<usize>>,
    j: f64,
    beta: f64,
}

impl SpinGraph {
    /// Undirected graph on `n` vertices. Edges are unordered pairs; self-loops
    /// and repeated pairs are rejected.
    pub fn new(n: usize, edges: Vec<(usize, usize)>, j: f64, beta: f64) -> Result<Self> {
        if !(j > 0.0 && j.is_finite()) {
            return Err(Error::Config(format!("coupling J = {j} must be positive")));
        }
        if !(beta >= 0.0 && beta.is_finite()) {
            return Err(Error::Config(format!("beta = {beta} must be non-negative")));
        }
        let mut neighbours = vec![Vec::new(); n];
        let mut canonical = Vec::with_capacity(edges.len());
        for &(u, v) in &edges {
            if u >= n || v >= n {
                return Err(Error::Config(format!("edge ({u}, {v}) outside {n} vertices")));
            }
            if u == v {
                return Err(Error::Config(format!("self-loop at vertex {u}")));
            }
            if neighbours[u].contains(&v) {
                return Err(Error::Config(format!("edge ({u}, {v}) listed twice")));
            }
            neighbours[u].push(v);
            neighbours[v].push(u);
            canonical.push((u.min(v), u.max(v)));
        }
        Ok(Self {
            n,
            edges: canonical,
            neighbours,
            j,
            beta,
        })
    }

    pub fn with_beta(&self, beta: f64) -> Result<Self> {
        Self::new(self.n, self.edges.clone(), self.j, beta)
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbours(&self, v: usize) -> &[usize] {
        &self.neighbours[v]
    }

    pub fn coupling(&self) -> f64 {
        self.j
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `U(σ)`, each undirected edge counted twice.
    pub fn potential(&self, sigma: &[i8]) -> f64 {
        let aligned: i64 = self
            .edges
            .iter()
            .map(|&(u, v)| (sigma[u] * sigma[v]) as i64)
            .sum();
        -2.0 * self.j * aligned as f64
    }

    /// `Σ_{j ∈ S_v} σ_j`.
    pub fn local_field(&self, sigma: &[i8], v: usize) -> i64 {
        self.neighbours[v].iter().map(|&u| sigma[u] as i64).sum()
    }

    /// `U(σ with v flipped) − U(σ) = 4 J σ_v h_v`.
    pub fn flip_delta(&self, sigma: &[i8], v: usize) -> f64 {
        4.0 * self.j * (sigma[v] as i64 * self.local_field(sigma, v)) as f64
    }

    /// Bond probability for cluster moves, `1 − exp(−4βJ)`. The doubled
    /// potential makes the effective pair coupling `2βJ`.
    pub fn bond_probability(&self) -> f64 {
        -(-4.0 * self.beta * self.j).exp_m1()
    }
}

impl TargetModel for SpinGraph {
    type State = SpinConfig;

    /// `−β U(σ)`.
    fn log_density(&self, state: &SpinConfig) -> f64 {
        -self.beta * self.potential(state)
    }

    fn state_space(&self) -> StateSpace {
        StateSpace::Spins(self.n)
    }
}

/// `(1/N) Σ σ_i`.
pub fn magnetisation(sigma: &[i8]) -> f64 {
    if sigma.is_empty() {
        return 0.0;
    }
    sigma.iter().map(|&s| s as f64).sum::<f64>() / sigma.len() as f64
}
