//! Fixtures for the throughput benchmarks.

use occlusion_core::gaussian::{GaussianMixture, GaussianProposal};
use occlusion_core::ising::{sbm_graph, SbmParams, SpinGraph, VariationalIsing};
use occlusion_core::{seed_stream, RegionPartition};

/// The bimodal mixture with a standard normal proposal and `C_1 = 1`.
pub fn gmm(d: usize) -> (GaussianMixture, GaussianProposal, RegionPartition) {
    (
        GaussianMixture::with_first_coordinate(d, 0.1, 2.5, 0.05).expect("valid mixture"),
        GaussianProposal::standard(d).expect("valid proposal"),
        RegionPartition::new(&[1.0]).expect("valid threshold"),
    )
}

/// An SBM Ising model with its variational approximation and a fixed
/// three-region partition around `ln(dP̃/dQ) = 0`.
pub fn ising(n: usize, k: usize, beta: f64) -> (SpinGraph, VariationalIsing, RegionPartition) {
    let mut rng = seed_stream(3, 0);
    let (graph, membership) = sbm_graph(&SbmParams::new(n, k, beta), &mut rng).expect("valid SBM");
    let q = VariationalIsing::build(&graph, &membership, 0.5 * beta, 0.1).expect("valid q");
    let partition = RegionPartition::from_log_thresholds(vec![-1.0, 1.0]).expect("valid cuts");
    (graph, q, partition)
}
