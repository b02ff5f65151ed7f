//! Exact estimator algebra on finite state spaces: resolutions, stratified
//! estimators, closed-form variances of the chain, ideal and occluded
//! estimators, and brute-force enumeration oracles to check them against.
//!
//! Every variance here assumes the chain starts in equilibrium, `X_1 ~ P`.

mod dominance;
mod enumerate;
mod estimators;
mod random;
mod variance;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub use dominance::{symmetrized_spectrum, variance_dominance_check, DominanceReport};
pub use enumerate::{
    brute_force_chain, brute_force_ideal, brute_force_ideal_variance, brute_force_occluded,
    brute_force_stratified, Moments, MAX_ENUM_LENGTH, MAX_ENUM_STATES,
};
pub use estimators::{
    proportional_allocation, proportional_variance_identity, resolution, stratified_estimate,
    stratified_variance_formula, ResolutionPair,
};
pub use random::{antithetic_witness, lazy, metropolis_kernel, random_system, RandomSystemSpec};
pub use variance::{
    asymptotic_occluded_variance, chain_variance, ideal_variance_formula,
    occluded_variance_exact, occluded_variance_formula, occluded_variance_terms, OccludedTerms,
};

const PROB_TOL: f64 = 1e-12;
const INVARIANCE_TOL: f64 = 1e-10;

/// A target `P` on `{0, …, m-1}`, a `P`-invariant kernel `K`, a test function
/// `f`, region labels `ρ` and per-region occlusion probabilities `α`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteSystem {
    p: DVector<f64>,
    k: DMatrix<f64>,
    f: DVector<f64>,
    regions: Vec<usize>,
    alpha: Vec<f64>,
}

impl DiscreteSystem {
    /// `k` is row-major. The region count is `alpha.len()`.
    pub fn new(
        p: Vec<f64>,
        k: Vec<Vec<f64>>,
        f: Vec<f64>,
        regions: Vec<usize>,
        alpha: Vec<f64>,
    ) -> Result<Self> {
        let m = p.len();
        if m == 0 {
            return Err(Error::Empty("state space"));
        }
        if k.len() != m || k.iter().any(|row| row.len() != m) {
            return Err(Error::Config(format!("transition matrix must be {m}x{m}")));
        }
        if f.len() != m || regions.len() != m {
            return Err(Error::Config(format!(
                "f and region labels need one entry per state ({m})"
            )));
        }
        let k = DMatrix::from_fn(m, m, |i, j| k[i][j]);
        Self::from_parts(DVector::from_vec(p), k, DVector::from_vec(f), regions, alpha)
    }

    pub fn from_parts(
        p: DVector<f64>,
        k: DMatrix<f64>,
        f: DVector<f64>,
        regions: Vec<usize>,
        alpha: Vec<f64>,
    ) -> Result<Self> {
        let m = p.len();
        if p.iter().any(|&x| !(x >= 0.0 && x.is_finite())) {
            return Err(Error::Config("probabilities must be finite and non-negative".into()));
        }
        if (p.sum() - 1.0).abs() > PROB_TOL {
            return Err(Error::Config(format!("probabilities sum to {}", p.sum())));
        }
        if k.nrows() != m || k.ncols() != m {
            return Err(Error::Config(format!("transition matrix must be {m}x{m}")));
        }
        if k.iter().any(|&x| !(x >= 0.0 && x.is_finite())) {
            return Err(Error::Config("transition probabilities must be non-negative".into()));
        }
        for (i, row) in k.row_iter().enumerate() {
            if (row.sum() - 1.0).abs() > PROB_TOL {
                return Err(Error::Config(format!("row {i} of K sums to {}", row.sum())));
            }
        }
        let drift = (k.tr_mul(&p) - &p).amax();
        if drift > INVARIANCE_TOL {
            return Err(Error::Config(format!(
                "K does not leave P invariant (max deviation {drift:.3e})"
            )));
        }
        if f.len() != m || regions.len() != m {
            return Err(Error::Config(format!(
                "f and region labels need one entry per state ({m})"
            )));
        }
        let r = alpha.len();
        if r == 0 {
            return Err(Error::Config("at least one region is required".into()));
        }
        if let Some(&bad) = regions.iter().find(|&&i| i >= r) {
            return Err(Error::Config(format!("region label {bad} out of range for {r} regions")));
        }
        if alpha.iter().any(|a| !(0.0..=1.0).contains(a)) {
            return Err(Error::Config("alpha values must lie in [0, 1]".into()));
        }
        let sys = Self {
            p,
            k,
            f,
            regions,
            alpha,
        };
        if let Some(region) = sys.region_masses().iter().position(|&w| w <= 0.0) {
            return Err(Error::ZeroMassRegion { region });
        }
        Ok(sys)
    }

    /// Same system with a different test function.
    pub fn with_f(&self, f: Vec<f64>) -> Result<Self> {
        Self::from_parts(
            self.p.clone(),
            self.k.clone(),
            DVector::from_vec(f),
            self.regions.clone(),
            self.alpha.clone(),
        )
    }

    pub fn with_alpha(&self, alpha: Vec<f64>) -> Result<Self> {
        Self::from_parts(
            self.p.clone(),
            self.k.clone(),
            self.f.clone(),
            self.regions.clone(),
            alpha,
        )
    }

    pub fn state_count(&self) -> usize {
        self.p.len()
    }

    pub fn region_count(&self) -> usize {
        self.alpha.len()
    }

    pub fn p(&self) -> &DVector<f64> {
        &self.p
    }

    pub fn k(&self) -> &DMatrix<f64> {
        &self.k
    }

    pub fn f(&self) -> &DVector<f64> {
        &self.f
    }

    pub fn regions(&self) -> &[usize] {
        &self.regions
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    /// `P(X_i)`.
    pub fn region_masses(&self) -> Vec<f64> {
        let mut w = vec![0.0; self.region_count()];
        for (x, &i) in self.regions.iter().enumerate() {
            w[i] += self.p[x];
        }
        w
    }

    /// `P_i(x)` for `x` in region `i`, zero elsewhere.
    pub fn restricted(&self, region: usize) -> Vec<f64> {
        let mass = self.region_masses()[region];
        (0..self.state_count())
            .map(|x| {
                if self.regions[x] == region {
                    self.p[x] / mass
                } else {
                    0.0
                }
            })
            .collect()
    }

    /// `P(g)`.
    pub fn mean(&self, g: &DVector<f64>) -> f64 {
        self.p.dot(g)
    }

    /// `Cov_P(a, b)`.
    pub fn cov(&self, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
        self.p.dot(&a.component_mul(b)) - self.mean(a) * self.mean(b)
    }

    pub fn var(&self, a: &DVector<f64>) -> f64 {
        self.cov(a, a)
    }

    /// The resolution of an arbitrary function: its region-wise `P` mean at
    /// every state.
    pub fn resolve(&self, g: &DVector<f64>) -> DVector<f64> {
        let masses = self.region_masses();
        let mut sums = vec![0.0; self.region_count()];
        for (x, &i) in self.regions.iter().enumerate() {
            sums[i] += self.p[x] * g[x];
        }
        DVector::from_fn(self.state_count(), |x, _| {
            let i = self.regions[x];
            sums[i] / masses[i]
        })
    }

    /// `α(ρ(x))` as a vector over states.
    pub fn alpha_by_state(&self) -> DVector<f64> {
        DVector::from_fn(self.state_count(), |x, _| self.alpha[self.regions[x]])
    }
}
