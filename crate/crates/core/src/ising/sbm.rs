//! Stochastic block model graphs with contiguous communities.

use rand::seq::index;
use rand::Rng;

use super::SpinGraph;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SbmParams {
    pub vertices: usize,
    pub communities: usize,
    pub intra: f64,
    pub inter: f64,
    pub j: f64,
    pub beta: f64,
}

impl SbmParams {
    pub fn new(vertices: usize, communities: usize, beta: f64) -> Self {
        Self {
            vertices,
            communities,
            intra: 0.8,
            inter: 0.01,
            j: 1.0,
            beta,
        }
    }
}

/// A composition of `n` into `k` positive parts, uniform over all
/// `C(n−1, k−1)` of them: choose `k − 1` distinct cut points in `1..n`.
pub fn random_composition<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Result<Vec<usize>> {
    if k == 0 || k > n {
        return Err(Error::Config(format!(
            "cannot split {n} vertices into {k} non-empty communities"
        )));
    }
    let mut cuts: Vec<usize> = index::sample(rng, n - 1, k - 1)
        .into_iter()
        .map(|c| c + 1)
        .collect();
    cuts.sort_unstable();
    cuts.push(n);
    let mut prev = 0;
    Ok(cuts
        .into_iter()
        .map(|c| {
            let size = c - prev;
            prev = c;
            size
        })
        .collect())
}

/// Community sizes recovered from a membership vector.
pub fn community_sizes(membership: &[usize]) -> Vec<usize> {
    let k = membership.iter().max().map_or(0, |m| m + 1);
    let mut sizes = vec![0; k];
    for &c in membership {
        sizes[c] += 1;
    }
    sizes
}

/// Draws community sizes, then every vertex pair independently: an edge with
/// probability `intra` inside a community and `inter` across. Vertices are
/// labelled so each community is a contiguous index range.
pub fn sbm_graph<R: Rng + ?Sized>(params: &SbmParams, rng: &mut R) -> Result<(SpinGraph, Vec<usize>)> {
    for (name, p) in [("intra", params.intra), ("inter", params.inter)] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Config(format!("{name} edge probability {p} outside [0, 1]")));
        }
    }
    let sizes = random_composition(params.vertices, params.communities, rng)?;
    let membership: Vec<usize> = sizes
        .iter()
        .enumerate()
        .flat_map(|(c, &s)| std::iter::repeat(c).take(s))
        .collect();
    let n = params.vertices;
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            let p = if membership[u] == membership[v] {
                params.intra
            } else {
                params.inter
            };
            if rng.random::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    let graph = SpinGraph::new(n, edges, params.j, params.beta)?;
    Ok((graph, membership))
}
