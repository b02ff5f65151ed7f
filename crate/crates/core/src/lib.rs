//! The occlusion process: a variance-reduction layer for MCMC that replaces
//! chain states with independent samples of the target restricted to the
//! region the chain currently occupies.

pub mod acf;
pub mod discrete;
pub mod error;
pub mod gaussian;
pub mod ising;
pub mod model;
pub mod occlusion;
pub mod partition;
pub mod rejection;
pub mod runtime;
pub mod theory;

pub use acf::{acf, AcfResult};
pub use error::{Error, Result};
pub use model::{MarkovKernel, StateSpace, TargetModel, VariationalModel};
pub use occlusion::{
    apply_plan, ideal_estimate, occlude, occlude_checked, occluded_estimate, plan_occlusion,
    ChainTrace, OcclusionPlan, OcclusionResult, RestrictedPool,
};
pub use partition::{log_rn_derivative, RegionMap, RegionPartition};
pub use rejection::rejection_attempt;
pub use runtime::{
    orchestrate, run_occlusion, seed_stream, OcclusionRun, RunConfig, RunReport, StopCondition,
};
