//! Exhaustive enumeration over `{−1, +1}^N` for small graphs. Configuration
//! `c` has `σ_v = +1` exactly when bit `v` of `c` is set.

use nalgebra::DMatrix;

use super::{grow_cluster, magnetisation, SpinConfig, SpinGraph};
use crate::error::{Error, Result};
use crate::model::TargetModel;

/// Largest `N` for which distributions are enumerated.
pub const MAX_EXACT_VERTICES: usize = 16;
/// Largest `N` for which `2^N × 2^N` transition matrices are built.
const MAX_MATRIX_VERTICES: usize = 8;

fn guard(n: usize, limit: usize, what: &'static str) -> Result<()> {
    if n > limit {
        Err(Error::TooLarge {
            what,
            value: n,
            limit,
        })
    } else {
        Ok(())
    }
}

pub fn config_from_index(c: usize, n: usize) -> SpinConfig {
    (0..n).map(|v| if c >> v & 1 == 1 { 1 } else { -1 }).collect()
}

pub fn config_index(sigma: &[i8]) -> usize {
    sigma
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > 0)
        .map(|(v, _)| 1usize << v)
        .sum()
}

pub fn all_configs(n: usize) -> Result<Vec<SpinConfig>> {
    guard(n, MAX_EXACT_VERTICES, "vertex count")?;
    Ok((0..1usize << n).map(|c| config_from_index(c, n)).collect())
}

/// Normalised Ising probabilities indexed by [`config_index`].
pub fn exact_distribution(graph: &SpinGraph) -> Result<Vec<f64>> {
    let configs = all_configs(graph.vertex_count())?;
    let logs: Vec<f64> = configs.iter().map(|s| graph.log_density(s)).collect();
    let m = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = logs.iter().map(|l| (l - m).exp()).collect();
    let z: f64 = w.iter().sum();
    Ok(w.into_iter().map(|x| x / z).collect())
}

/// `E_P[(1/N) Σ σ_v]`.
pub fn exact_magnetisation(graph: &SpinGraph) -> Result<f64> {
    let p = exact_distribution(graph)?;
    let n = graph.vertex_count();
    Ok(p
        .iter()
        .enumerate()
        .map(|(c, w)| w * magnetisation(&config_from_index(c, n)))
        .sum())
}

/// Single-site Metropolis transition matrix.
pub fn metropolis_matrix(graph: &SpinGraph) -> Result<DMatrix<f64>> {
    let n = graph.vertex_count();
    guard(n, MAX_MATRIX_VERTICES, "vertex count")?;
    let size = 1usize << n;
    let mut k = DMatrix::zeros(size, size);
    for c in 0..size {
        let sigma = config_from_index(c, n);
        let mut stay = 1.0;
        for v in 0..n {
            let accept = (-graph.beta() * graph.flip_delta(&sigma, v)).exp().min(1.0);
            let prob = accept / n as f64;
            k[(c, c ^ (1 << v))] += prob;
            stay -= prob;
        }
        k[(c, c)] += stay;
    }
    Ok(k)
}

/// Wolff transition matrix. For every state and seed, the cluster-growth
/// coin sequences are enumerated depth first; each complete sequence
/// contributes its probability to the state reached by flipping its cluster.
pub fn wolff_matrix(graph: &SpinGraph) -> Result<DMatrix<f64>> {
    let n = graph.vertex_count();
    guard(n, MAX_MATRIX_VERTICES, "vertex count")?;
    let p = graph.bond_probability();
    let size = 1usize << n;
    let mut k = DMatrix::zeros(size, size);
    for c in 0..size {
        let sigma = config_from_index(c, n);
        for seed in 0..n {
            let mut stack: Vec<(Vec<bool>, f64)> = vec![(Vec::new(), 1.0 / n as f64)];
            while let Some((prefix, weight)) = stack.pop() {
                let mut used = 0;
                let outcome = grow_cluster(graph, &sigma, seed, || {
                    let next = prefix.get(used).copied();
                    used += 1;
                    next
                });
                match outcome {
                    Some(cluster) => {
                        let mask: usize = cluster.iter().map(|&v| 1usize << v).sum();
                        k[(c, c ^ mask)] += weight;
                    }
                    None => {
                        for (coin, q) in [(true, p), (false, 1.0 - p)] {
                            if q > 0.0 {
                                let mut longer = prefix.clone();
                                longer.push(coin);
                                stack.push((longer, weight * q));
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(k)
}
