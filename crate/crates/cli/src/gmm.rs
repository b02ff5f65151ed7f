//! Bimodal Gaussian mixture study: RWM plus occlusion with two regions cut at
//! `dP/dQ = C_1`, replicated per dimension.

use occlusion_core::gaussian::{
    laplace_approximation, GaussianMixture, GaussianProposal, LaplaceOptions,
    RandomWalkMetropolis,
};
use occlusion_core::{run_occlusion, seed_stream, RegionMap, RegionPartition};

use crate::config::{ExperimentConfig, ProposalKind};
use crate::error::CliResult;
use crate::experiment::{derive_seed, replicate, run_config, summarise, CellLabel, INIT_STREAM};
use crate::output::ExperimentOutput;

const GMM_TAG: u64 = 0;

pub fn proposal_for(cfg: &ExperimentConfig, mix: &GaussianMixture) -> CliResult<GaussianProposal> {
    Ok(match cfg.gmm.proposal {
        ProposalKind::StandardNormal => GaussianProposal::standard(mix.dim())?,
        ProposalKind::Laplace => laplace_approximation(mix, &LaplaceOptions::default())?,
    })
}

pub fn simulate(cfg: &ExperimentConfig) -> CliResult<ExperimentOutput> {
    cfg.validate_gmm()?;
    let g = &cfg.gmm;
    let mut out = ExperimentOutput::default();
    for (di, &d) in g.dimensions.iter().enumerate() {
        let mix = GaussianMixture::with_first_coordinate(d, g.weight, g.mean_first, g.sigma2)?;
        let q = proposal_for(cfg, &mix)?;
        let partition = RegionPartition::new(&[g.threshold])?;
        let map = RegionMap::new(&mix, &q, &partition);
        let step = g
            .step
            .unwrap_or_else(|| RandomWalkMetropolis::<GaussianMixture>::default_step(d));
        log::info!("gmm d = {d}: {} replications, step {step:.4}", g.replications);

        let reps = replicate(g.replications, cfg.run.parallel_replications, |r| {
            let seed = derive_seed(cfg.seed, &[GMM_TAG, di as u64, r as u64]);
            let initial = q.sample(&mut seed_stream(seed, INIT_STREAM));
            let kernel = RandomWalkMetropolis::new(&mix, step)?;
            let run = run_occlusion(kernel, initial, &map, |x| x[0], &run_config(cfg, seed))?;
            summarise(&run, |x| x[0], cfg.deterministic, r < cfg.run.trace_replications)
        })?;

        let label = CellLabel {
            experiment: "gmm",
            kernel: "rwm",
            d: Some(d),
            n: None,
            k: None,
            beta: None,
        };
        for (r, rep) in reps.into_iter().enumerate() {
            out.summary.extend(label.rows(r, &rep));
            if let Some(trace) = rep.trace {
                out.traces.push((format!("gmm_d{d}_rep{r}"), trace));
            }
        }
    }
    Ok(out)
}
