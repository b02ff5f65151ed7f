//! Ising study on stochastic block model graphs. One graph per `(k, N)` cell
//! serves every temperature and kernel. Thresholds come from a Wolff
//! calibration run per temperature, shared by both kernels.

use occlusion_core::ising::{
    magnetisation, sbm_graph, swendsen_wang_init, threshold_calibration, EdgeList,
    IsingMetropolis, SbmParams, SpinConfig, VariationalIsing, Wolff,
};
use occlusion_core::{run_occlusion, seed_stream, OcclusionRun, RegionMap, RegionPartition};

use crate::config::{ExperimentConfig, KernelKind};
use crate::error::CliResult;
use crate::experiment::{derive_seed, replicate, run_config, summarise, CellLabel, INIT_STREAM};
use crate::output::ExperimentOutput;

const ISING_TAG: u64 = 1;
/// Child index of the graph draw, below the cell node.
const GRAPH_NODE: u64 = u64::MAX;
/// Child index of the calibration run, below the temperature node.
const CALIBRATION_NODE: u64 = u64::MAX;

fn magnetisation_of(sigma: &SpinConfig) -> f64 {
    magnetisation(sigma)
}

pub fn simulate(cfg: &ExperimentConfig) -> CliResult<ExperimentOutput> {
    cfg.validate_ising()?;
    let s = &cfg.ising;
    let mut out = ExperimentOutput::default();
    for (ni, &n) in s.vertices.iter().enumerate() {
        for (ki, &k) in s.communities.iter().enumerate() {
            let cell = (ni * s.communities.len() + ki) as u64;
            let params = SbmParams {
                vertices: n,
                communities: k,
                intra: s.intra,
                inter: s.inter,
                j: s.coupling,
                beta: 0.0,
            };
            let mut graph_rng =
                seed_stream(derive_seed(cfg.seed, &[ISING_TAG, cell, GRAPH_NODE]), 0);
            let (base, membership) = sbm_graph(&params, &mut graph_rng)?;
            log::info!(
                "ising k = {k}, N = {n}: {} edges",
                base.edges().len()
            );
            out.graphs.push((
                format!("k{k}_n{n}"),
                EdgeList {
                    vertices: n,
                    edges: base.edges().to_vec(),
                    membership: Some(membership.clone()),
                },
            ));

            for (ti, t) in s.temperatures.iter().enumerate() {
                let graph = base.with_beta(t.beta)?;
                let q = VariationalIsing::build(
                    &graph,
                    &membership,
                    s.beta_tilde_ratio * t.beta,
                    t.epsilon,
                )?;
                let mut cal_rng = seed_stream(
                    derive_seed(cfg.seed, &[ISING_TAG, cell, ti as u64, CALIBRATION_NODE]),
                    0,
                );
                let cal = threshold_calibration(&graph, &q, s.calibration_steps, &mut cal_rng)?;
                log::info!(
                    "beta = {}: thresholds {:?}{}",
                    t.beta,
                    cal.partition.log_thresholds(),
                    if cal.degenerate { " (degenerate)" } else { "" }
                );
                let partition: RegionPartition = cal.partition;
                let map = RegionMap::new(&graph, &q, &partition);

                for (kk, &kernel) in s.kernels.iter().enumerate() {
                    let reps = replicate(s.replications, cfg.run.parallel_replications, |r| {
                        let seed = derive_seed(
                            cfg.seed,
                            &[ISING_TAG, cell, ti as u64, kk as u64, r as u64],
                        );
                        let mut init_rng = seed_stream(seed, INIT_STREAM);
                        let (initial, _) = swendsen_wang_init(
                            &graph,
                            s.sw_target,
                            s.sw_block_length,
                            &mut init_rng,
                        )?;
                        let rc = run_config(cfg, seed);
                        let run: OcclusionRun<SpinConfig> = match kernel {
                            KernelKind::Metropolis => run_occlusion(
                                IsingMetropolis::new(&graph),
                                initial,
                                &map,
                                magnetisation_of,
                                &rc,
                            )?,
                            KernelKind::Wolff => {
                                run_occlusion(Wolff::new(&graph), initial, &map, magnetisation_of, &rc)?
                            }
                        };
                        summarise(
                            &run,
                            magnetisation_of,
                            cfg.deterministic,
                            r < cfg.run.trace_replications,
                        )
                    })?;

                    let label = CellLabel {
                        experiment: "ising",
                        kernel: kernel.name(),
                        d: None,
                        n: Some(n),
                        k: Some(k),
                        beta: Some(t.beta),
                    };
                    for (r, rep) in reps.into_iter().enumerate() {
                        out.summary.extend(label.rows(r, &rep));
                        if let Some(trace) = rep.trace {
                            out.traces.push((
                                format!("ising_{}_k{k}_n{n}_b{}_rep{r}", kernel.name(), t.beta),
                                trace,
                            ));
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}
