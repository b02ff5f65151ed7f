//! Experiment configuration: one TOML file with a versioned schema. Every
//! field has a default, so an empty file (plus `version = 1`) runs the
//! full-size studies.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub version: u32,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Fixed chain lengths and fixed attempts per worker; bit-identical output.
    #[serde(default)]
    pub deterministic: bool,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub gmm: GmmSection,
    #[serde(default)]
    pub ising: IsingSection,
}

fn default_seed() -> u64 {
    1
}

fn default_output() -> PathBuf {
    PathBuf::from("results")
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            version: SCHEMA_VERSION,
            seed: default_seed(),
            deterministic: false,
            output: default_output(),
            run: RunSection::default(),
            gmm: GmmSection::default(),
            ising: IsingSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    /// Chain length `n`.
    pub steps: usize,
    /// Wall-clock budget per run. Replaces `steps` when set.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seconds: Option<f64>,
    /// `C_rej`.
    pub workers: usize,
    /// Rejection attempts per worker in deterministic mode; `steps` if unset.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub attempts_per_worker: Option<u64>,
    /// How many replications per cell also get a trace CSV.
    pub trace_replications: usize,
    pub acf_max_lag: usize,
    /// Run the replications of a cell on separate threads.
    pub parallel_replications: bool,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            steps: 10_000,
            seconds: None,
            workers: 6,
            attempts_per_worker: None,
            trace_replications: 1,
            acf_max_lag: 50,
            parallel_replications: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProposalKind {
    StandardNormal,
    Laplace,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GmmSection {
    pub replications: usize,
    pub dimensions: Vec<usize>,
    /// Weight `p` of the narrow component.
    pub weight: f64,
    /// First coordinate of the narrow component's mean.
    pub mean_first: f64,
    /// Per-coordinate variance of the narrow component.
    pub sigma2: f64,
    /// RWM step size; `2.38 / sqrt(d)` if unset.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    /// `C_1` for the two-region partition, on normalised densities.
    pub threshold: f64,
    pub proposal: ProposalKind,
}

impl Default for GmmSection {
    fn default() -> Self {
        Self {
            replications: 20,
            dimensions: vec![1, 100],
            weight: 0.1,
            mean_first: 2.5,
            sigma2: 0.05,
            step: None,
            threshold: 1.0,
            proposal: ProposalKind::StandardNormal,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelKind {
    Metropolis,
    Wolff,
}

impl KernelKind {
    pub fn name(self) -> &'static str {
        match self {
            KernelKind::Metropolis => "metropolis",
            KernelKind::Wolff => "wolff",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Temperature {
    pub beta: f64,
    /// Spin-flip probability of the variational approximation.
    pub epsilon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IsingSection {
    pub replications: usize,
    pub vertices: Vec<usize>,
    pub communities: Vec<usize>,
    pub temperatures: Vec<Temperature>,
    pub kernels: Vec<KernelKind>,
    pub coupling: f64,
    pub intra: f64,
    pub inter: f64,
    /// `β̃ / β`.
    pub beta_tilde_ratio: f64,
    /// Wolff steps used to place the thresholds.
    pub calibration_steps: usize,
    /// Target probability of an uncoupled Swendsen–Wang start.
    pub sw_target: f64,
    /// Swendsen–Wang steps per halving block; `10 N` if unset.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sw_block_length: Option<usize>,
}

impl Default for IsingSection {
    fn default() -> Self {
        Self {
            replications: 15,
            vertices: vec![20, 50, 100],
            communities: vec![2, 5, 10],
            temperatures: vec![
                Temperature {
                    beta: 1.0,
                    epsilon: 0.1,
                },
                Temperature {
                    beta: 0.01,
                    epsilon: 0.9,
                },
            ],
            kernels: vec![KernelKind::Metropolis, KernelKind::Wolff],
            coupling: 1.0,
            intra: 0.8,
            inter: 0.01,
            beta_tilde_ratio: 0.5,
            calibration_steps: 10_000,
            sw_target: 1e-4,
            sw_block_length: None,
        }
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
    pub deterministic: bool,
    pub steps: Option<usize>,
    pub seconds: Option<f64>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> CliResult<Self> {
        let config: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        if config.version != SCHEMA_VERSION {
            return Err(CliError::Config(format!(
                "unsupported schema version {} (expected {SCHEMA_VERSION})",
                config.version
            )));
        }
        Ok(config)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> CliResult<String> {
        toml::to_string(self).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(seed) = o.seed {
            self.seed = seed;
        }
        if let Some(out) = &o.output {
            self.output = out.clone();
        }
        if o.deterministic {
            self.deterministic = true;
        }
        if let Some(steps) = o.steps {
            self.run.steps = steps;
        }
        if let Some(s) = o.seconds {
            self.run.seconds = Some(s);
        }
    }

    /// Attempts per rejection worker in deterministic mode.
    pub fn attempts_per_worker(&self) -> u64 {
        self.run.attempts_per_worker.unwrap_or(self.run.steps as u64)
    }

    pub fn validate_run(&self) -> CliResult<()> {
        let r = &self.run;
        if r.steps == 0 {
            return bad("run.steps must be at least 1");
        }
        if let Some(s) = r.seconds {
            if !(s > 0.0 && s.is_finite()) {
                return bad(format!("run.seconds must be positive, got {s}"));
            }
            if self.deterministic {
                return bad("a wall-clock budget cannot be combined with deterministic mode");
            }
        }
        if r.acf_max_lag >= r.steps {
            return bad(format!(
                "run.acf_max_lag ({}) must be below run.steps ({})",
                r.acf_max_lag, r.steps
            ));
        }
        Ok(())
    }

    pub fn validate_gmm(&self) -> CliResult<()> {
        self.validate_run()?;
        let g = &self.gmm;
        if g.replications == 0 {
            return bad("gmm.replications must be at least 1");
        }
        if g.dimensions.is_empty() || g.dimensions.contains(&0) {
            return bad("gmm.dimensions must be a non-empty list of positive integers");
        }
        if !(g.weight > 0.0 && g.weight < 1.0) {
            return bad(format!("gmm.weight must lie in (0, 1), got {}", g.weight));
        }
        if !(g.sigma2 > 0.0 && g.sigma2.is_finite()) {
            return bad(format!("gmm.sigma2 must be positive, got {}", g.sigma2));
        }
        if !g.mean_first.is_finite() {
            return bad("gmm.mean_first must be finite");
        }
        if let Some(s) = g.step {
            if !(s > 0.0 && s.is_finite()) {
                return bad(format!("gmm.step must be positive, got {s}"));
            }
        }
        if !(g.threshold > 0.0 && g.threshold.is_finite()) {
            return bad(format!("gmm.threshold must be positive, got {}", g.threshold));
        }
        Ok(())
    }

    pub fn validate_ising(&self) -> CliResult<()> {
        self.validate_run()?;
        let s = &self.ising;
        if s.replications == 0 {
            return bad("ising.replications must be at least 1");
        }
        if s.vertices.is_empty() || s.vertices.contains(&0) {
            return bad("ising.vertices must be a non-empty list of positive integers");
        }
        if s.communities.is_empty() || s.communities.contains(&0) {
            return bad("ising.communities must be a non-empty list of positive integers");
        }
        let max_k = *s.communities.iter().max().expect("non-empty");
        let min_n = *s.vertices.iter().min().expect("non-empty");
        if max_k > min_n {
            return bad(format!(
                "ising.communities contains k = {max_k} but ising.vertices contains N = {min_n}; k > N is not allowed"
            ));
        }
        if max_k > occlusion_core::ising::MAX_CLUSTERS {
            return bad(format!(
                "ising.communities allows at most {} communities",
                occlusion_core::ising::MAX_CLUSTERS
            ));
        }
        if s.temperatures.is_empty() {
            return bad("ising.temperatures must not be empty");
        }
        for t in &s.temperatures {
            if !(t.beta >= 0.0 && t.beta.is_finite()) {
                return bad(format!("temperature beta must be non-negative, got {}", t.beta));
            }
            if !(t.epsilon > 0.0 && t.epsilon < 1.0) {
                return bad(format!("temperature epsilon must lie in (0, 1), got {}", t.epsilon));
            }
        }
        if s.kernels.is_empty() {
            return bad("ising.kernels must not be empty");
        }
        if !(s.coupling > 0.0 && s.coupling.is_finite()) {
            return bad(format!("ising.coupling must be positive, got {}", s.coupling));
        }
        for (name, p) in [("intra", s.intra), ("inter", s.inter)] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("ising.{name} must lie in [0, 1], got {p}"));
            }
        }
        if !(s.beta_tilde_ratio >= 0.0 && s.beta_tilde_ratio.is_finite()) {
            return bad("ising.beta_tilde_ratio must be non-negative");
        }
        if s.calibration_steps == 0 {
            return bad("ising.calibration_steps must be at least 1");
        }
        if !(s.sw_target > 0.0 && s.sw_target < 1.0) {
            return bad(format!("ising.sw_target must lie in (0, 1), got {}", s.sw_target));
        }
        if s.sw_block_length == Some(0) {
            return bad("ising.sw_block_length must be positive");
        }
        Ok(())
    }
}

fn bad<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Config(msg.into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_file_gets_defaults() {
        let c = ExperimentConfig::from_toml("version = 1").unwrap();
        assert_eq!(c, ExperimentConfig::default());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(ExperimentConfig::from_toml("version = 1\nbogus = 3").is_err());
        assert!(ExperimentConfig::from_toml("version = 1\n[run]\nstep = 3").is_err());
    }

    #[test]
    fn version_is_required_and_checked() {
        assert!(ExperimentConfig::from_toml("seed = 3").is_err());
        assert!(ExperimentConfig::from_toml("version = 2").is_err());
    }

    #[test]
    fn serialisation_round_trips() {
        let mut c = ExperimentConfig::default();
        c.run.seconds = Some(2.5);
        c.gmm.step = Some(0.3);
        let text = c.to_toml().unwrap();
        let back = ExperimentConfig::from_toml(&text).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.to_toml().unwrap(), text);
    }

    #[test]
    fn overrides_take_precedence() {
        let mut c = ExperimentConfig::default();
        c.apply(&Overrides {
            seed: Some(9),
            steps: Some(5),
            deterministic: true,
            ..Default::default()
        });
        assert_eq!((c.seed, c.run.steps, c.deterministic), (9, 5, true));
    }

    #[test]
    fn validation_catches_bad_values() {
        let mut c = ExperimentConfig::default();
        c.run.steps = 0;
        assert!(c.validate_gmm().is_err());

        let mut c = ExperimentConfig::default();
        c.ising.communities = vec![30];
        assert!(c.validate_ising().is_err());

        let mut c = ExperimentConfig::default();
        c.deterministic = true;
        c.run.seconds = Some(1.0);
        assert!(c.validate_run().is_err());

        assert!(ExperimentConfig::default().validate_gmm().is_ok());
        assert!(ExperimentConfig::default().validate_ising().is_ok());
    }
}
