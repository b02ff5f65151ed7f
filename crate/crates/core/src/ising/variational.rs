//! Block-mean approximation of the Ising measure. Vertices are grouped into
//! `k` clusters; a cluster-level Ising model over means
//! `μ ∈ {−(1−ε), 1−ε}^k` is tabulated exactly, and spins are then drawn
//! independently with `P(σ_v = +1 | μ) = (1 + μ_i)/2` for `v` in cluster `i`.

use rand::Rng;

use super::{SpinConfig, SpinGraph};
use crate::error::{Error, Result};
use crate::model::VariationalModel;

/// Largest cluster count for which the `2^k` table is built.
pub const MAX_CLUSTERS: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterGraph {
    k: usize,
    membership: Vec<usize>,
    sizes: Vec<usize>,
    /// Row-major `k × k` counts of edges between distinct clusters. The
    /// diagonal is zero: edges inside a cluster do not couple cluster means.
    jtilde: Vec<f64>,
    beta_tilde: f64,
    epsilon: f64,
}

impl ClusterGraph {
    pub fn new(
        graph: &SpinGraph,
        membership: &[usize],
        beta_tilde: f64,
        epsilon: f64,
    ) -> Result<Self> {
        let n = graph.vertex_count();
        if membership.len() != n {
            return Err(Error::Config(format!(
                "membership has {} labels for {n} vertices",
                membership.len()
            )));
        }
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::Config(format!("epsilon = {epsilon} must lie in (0, 1)")));
        }
        if !(beta_tilde >= 0.0 && beta_tilde.is_finite()) {
            return Err(Error::Config(format!(
                "variational beta = {beta_tilde} must be non-negative"
            )));
        }
        let k = membership.iter().max().map_or(0, |m| m + 1);
        if k == 0 {
            return Err(Error::Empty("cluster membership"));
        }
        if k > MAX_CLUSTERS {
            return Err(Error::TooLarge {
                what: "cluster count",
                value: k,
                limit: MAX_CLUSTERS,
            });
        }
        let mut sizes = vec![0; k];
        for &c in membership {
            sizes[c] += 1;
        }
        if let Some(empty) = sizes.iter().position(|&s| s == 0) {
            return Err(Error::Config(format!("cluster {empty} has no vertices")));
        }
        let mut jtilde = vec![0.0; k * k];
        for &(u, v) in graph.edges() {
            let (a, b) = (membership[u], membership[v]);
            if a != b {
                jtilde[a * k + b] += 1.0;
                jtilde[b * k + a] += 1.0;
            }
        }
        Ok(Self {
            k,
            membership: membership.to_vec(),
            sizes,
            jtilde,
            beta_tilde,
            epsilon,
        })
    }

    pub fn cluster_count(&self) -> usize {
        self.k
    }

    pub fn membership(&self) -> &[usize] {
        &self.membership
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn jtilde(&self, i: usize, j: usize) -> f64 {
        self.jtilde[i * self.k + j]
    }

    pub fn beta_tilde(&self) -> f64 {
        self.beta_tilde
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// `μ` for a sign pattern: bit `i` set means `μ_i = 1 − ε`.
    pub fn means(&self, pattern: usize) -> Vec<f64> {
        let m = 1.0 - self.epsilon;
        (0..self.k)
            .map(|i| if pattern >> i & 1 == 1 { m } else { -m })
            .collect()
    }

    /// `Ũ(μ) = −Σ_i Σ_j J̃_ij μ_i μ_j`, both orders of every pair.
    pub fn potential(&self, mu: &[f64]) -> f64 {
        let mut u = 0.0;
        for i in 0..self.k {
            for j in 0..self.k {
                u -= self.jtilde(i, j) * mu[i] * mu[j];
            }
        }
        u
    }
}

#[derive(Debug, Clone)]
pub struct VariationalIsing {
    clusters: ClusterGraph,
    log_table: Vec<f64>,
    cumulative: Vec<f64>,
    log_normalizer: f64,
}

impl VariationalIsing {
    pub fn new(clusters: ClusterGraph) -> Self {
        let patterns = 1usize << clusters.k;
        let log_weights: Vec<f64> = (0..patterns)
            .map(|p| -clusters.beta_tilde * clusters.potential(&clusters.means(p)))
            .collect();
        let log_normalizer = log_sum_exp(&log_weights);
        let log_table: Vec<f64> = log_weights.iter().map(|w| w - log_normalizer).collect();
        let mut acc = 0.0;
        let cumulative = log_table
            .iter()
            .map(|l| {
                acc += l.exp();
                acc
            })
            .collect();
        Self {
            clusters,
            log_table,
            cumulative,
            log_normalizer,
        }
    }

    pub fn build(
        graph: &SpinGraph,
        membership: &[usize],
        beta_tilde: f64,
        epsilon: f64,
    ) -> Result<Self> {
        Ok(Self::new(ClusterGraph::new(graph, membership, beta_tilde, epsilon)?))
    }

    pub fn clusters(&self) -> &ClusterGraph {
        &self.clusters
    }

    /// `log Z̃(β̃)`.
    pub fn log_normalizer(&self) -> f64 {
        self.log_normalizer
    }

    /// Probabilities of the `2^k` sign patterns, indexed as in
    /// [`ClusterGraph::means`].
    pub fn table(&self) -> Vec<f64> {
        self.log_table.iter().map(|l| l.exp()).collect()
    }

    /// `E[μ_i]` under the table.
    pub fn expected_means(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.clusters.k];
        for (p, l) in self.log_table.iter().enumerate() {
            let w = l.exp();
            for (o, m) in out.iter_mut().zip(self.clusters.means(p)) {
                *o += w * m;
            }
        }
        out
    }

    pub fn sample_pattern<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let total = *self.cumulative.last().expect("non-empty table");
        let u = rng.random::<f64>() * total;
        self.cumulative
            .partition_point(|&c| c <= u)
            .min(self.cumulative.len() - 1)
    }

    /// Spins given cluster means.
    pub fn sample_given<R: Rng + ?Sized>(&self, mu: &[f64], rng: &mut R) -> SpinConfig {
        self.clusters
            .membership
            .iter()
            .map(|&c| {
                if rng.random::<f64>() < (1.0 + mu[c]) / 2.0 {
                    1
                } else {
                    -1
                }
            })
            .collect()
    }

    /// Normalised `log q(σ)`.
    pub fn log_q(&self, sigma: &[i8]) -> f64 {
        let k = self.clusters.k;
        let mut up = vec![0usize; k];
        for (&c, &s) in self.clusters.membership.iter().zip(sigma) {
            if s > 0 {
                up[c] += 1;
            }
        }
        let half_eps = self.clusters.epsilon / 2.0;
        let (ln_hi, ln_lo) = ((1.0 - half_eps).ln(), half_eps.ln());
        // Per cluster, the conditional log-likelihood for μ_i > 0 and μ_i < 0.
        let per_cluster: Vec<(f64, f64)> = (0..k)
            .map(|i| {
                let (a, b) = (up[i] as f64, (self.clusters.sizes[i] - up[i]) as f64);
                (a * ln_hi + b * ln_lo, a * ln_lo + b * ln_hi)
            })
            .collect();
        let term = |p: usize| {
            self.log_table[p]
                + per_cluster
                    .iter()
                    .enumerate()
                    .map(|(i, &(pos, neg))| if p >> i & 1 == 1 { pos } else { neg })
                    .sum::<f64>()
        };
        // Each pattern is paired with its negation and the pair is combined
        // symmetrically, so q(σ) and q(−σ) round identically.
        let full = (1usize << k) - 1;
        let pairs: Vec<f64> = (0..1usize << (k - 1))
            .map(|p| {
                let (a, b) = (term(p), term(p ^ full));
                let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
                hi + (lo - hi).exp().ln_1p()
            })
            .collect();
        log_sum_exp(&pairs)
    }
}

impl VariationalModel for VariationalIsing {
    type State = SpinConfig;

    fn log_density(&self, state: &SpinConfig) -> f64 {
        self.log_q(state)
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> SpinConfig {
        let mu = self.clusters.means(self.sample_pattern(rng));
        self.sample_given(&mu, rng)
    }
}

fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn two_clusters() -> (SpinGraph, Vec<usize>) {
        // five edges between the two halves, two inside
        let edges = vec![(0, 3), (0, 4), (1, 3), (1, 5), (2, 5), (0, 1), (3, 4)];
        (SpinGraph::new(6, edges, 1.0, 1.0).unwrap(), vec![0, 0, 0, 1, 1, 1])
    }

    #[test]
    fn jtilde_counts_cross_edges_only() {
        let (g, m) = two_clusters();
        let c = ClusterGraph::new(&g, &m, 0.5, 0.1).unwrap();
        assert_eq!(c.jtilde(0, 1), 5.0);
        assert_eq!(c.jtilde(1, 0), 5.0);
        assert_eq!(c.jtilde(0, 0), 0.0);
    }

    #[test]
    fn two_cluster_table_closed_form() {
        let (g, m) = two_clusters();
        let v = VariationalIsing::build(&g, &m, 0.5, 0.1).unwrap();
        let a = (0.5f64 * 2.0 * 5.0 * 0.81).exp();
        let z = 2.0 * a + 2.0 / a;
        let t = v.table();
        // patterns: 0 = (−,−), 1 = (+,−), 2 = (−,+), 3 = (+,+)
        let expected = [a / z, 1.0 / (a * z), 1.0 / (a * z), a / z];
        for (x, e) in t.iter().zip(expected) {
            assert!((x - e).abs() < 1e-12);
        }
        assert!((t.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_cluster_is_uniform() {
        let g = SpinGraph::new(3, vec![(0, 1), (1, 2)], 1.0, 1.0).unwrap();
        let v = VariationalIsing::build(&g, &[0, 0, 0], 0.5, 0.1).unwrap();
        assert_eq!(v.table(), vec![0.5, 0.5]);
    }

    #[test]
    fn zero_beta_tilde_is_uniform() {
        let (g, m) = two_clusters();
        let v = VariationalIsing::build(&g, &m, 0.0, 0.3).unwrap();
        assert!(v.table().iter().all(|&x| (x - 0.25).abs() < 1e-15));
    }

    #[test]
    fn lone_vertex_has_half_mass() {
        let g = SpinGraph::new(1, vec![], 1.0, 1.0).unwrap();
        let v = VariationalIsing::build(&g, &[0], 0.5, 0.1).unwrap();
        assert!((v.log_q(&[1]).exp() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn conditional_spin_probability() {
        let g = SpinGraph::new(200, vec![], 1.0, 1.0).unwrap();
        let v = VariationalIsing::build(&g, &vec![0; 200], 0.5, 0.1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut up = 0usize;
        let reps = 500;
        for _ in 0..reps {
            up += v.sample_given(&[0.9], &mut rng).iter().filter(|&&s| s > 0).count();
        }
        let p = up as f64 / (200 * reps) as f64;
        let se = (0.95f64 * 0.05 / (200 * reps) as f64).sqrt();
        assert!((p - 0.95).abs() < 4.0 * se, "p = {p}");
    }

    #[test]
    fn rejects_bad_inputs() {
        let (g, m) = two_clusters();
        assert!(ClusterGraph::new(&g, &m, 0.5, 0.0).is_err());
        assert!(ClusterGraph::new(&g, &m, 0.5, 1.0).is_err());
        assert!(ClusterGraph::new(&g, &m[..5], 0.5, 0.1).is_err());
        assert!(ClusterGraph::new(&g, &[0, 0, 0, 2, 2, 2], 0.5, 0.1).is_err());
        let big = SpinGraph::new(21, vec![], 1.0, 1.0).unwrap();
        let labels: Vec<usize> = (0..21).collect();
        assert!(matches!(
            ClusterGraph::new(&big, &labels, 0.5, 0.1),
            Err(Error::TooLarge { .. })
        ));
    }
}
