//! Bimodal Gaussian mixture target, Gaussian proposals with a Laplace
//! approximation, and random walk Metropolis.

use std::f64::consts::PI;

use nalgebra::{Cholesky, DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::model::{MarkovKernel, StateSpace, TargetModel, VariationalModel};

fn log_sum_exp(a: f64, b: f64) -> f64 {
    let hi = a.max(b);
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    hi + ((a - hi).exp() + (b - hi).exp()).ln()
}

/// `(1 − p) N(0, I_d) + p N(m, σ² I_d)`, normalised.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMixture {
    p: f64,
    m: Vec<f64>,
    sigma2: f64,
}

impl GaussianMixture {
    pub fn new(p: f64, m: Vec<f64>, sigma2: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Config(format!("mixture weight {p} outside [0, 1]")));
        }
        if m.is_empty() {
            return Err(Error::Config("dimension must be at least 1".into()));
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("component mean must be finite".into()));
        }
        if !(sigma2 > 0.0 && sigma2.is_finite()) {
            return Err(Error::Config(format!("sigma2 = {sigma2} must be positive")));
        }
        Ok(Self { p, m, sigma2 })
    }

    /// The two-mode configuration: second mean `(m1, 0, …, 0)`.
    pub fn with_first_coordinate(d: usize, p: f64, m1: f64, sigma2: f64) -> Result<Self> {
        if d == 0 {
            return Err(Error::Config("dimension must be at least 1".into()));
        }
        let mut m = vec![0.0; d];
        m[0] = m1;
        Self::new(p, m, sigma2)
    }

    pub fn dim(&self) -> usize {
        self.m.len()
    }

    pub fn weight(&self) -> f64 {
        self.p
    }

    pub fn mean(&self) -> &[f64] {
        &self.m
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    /// Log-densities of the two weighted components.
    fn components(&self, x: &[f64]) -> (f64, f64) {
        let d = self.dim() as f64;
        let r0: f64 = x.iter().map(|v| v * v).sum();
        let r1: f64 = x.iter().zip(&self.m).map(|(v, m)| (v - m).powi(2)).sum();
        let l0 = (1.0 - self.p).ln() - 0.5 * d * (2.0 * PI).ln() - 0.5 * r0;
        let l1 = self.p.ln() - 0.5 * d * (2.0 * PI * self.sigma2).ln() - 0.5 * r1 / self.sigma2;
        (l0, l1)
    }

    /// Normalised log-density.
    pub fn log_density(&self, x: &[f64]) -> f64 {
        let (l0, l1) = self.components(x);
        log_sum_exp(l0, l1)
    }

    /// Posterior weight of each component at `x`.
    fn responsibilities(&self, x: &[f64]) -> (f64, f64) {
        let (l0, l1) = self.components(x);
        let z = log_sum_exp(l0, l1);
        ((l0 - z).exp(), (l1 - z).exp())
    }

    /// `∇ log p(x)`.
    pub fn grad_log_density(&self, x: &[f64]) -> Vec<f64> {
        let (w0, w1) = self.responsibilities(x);
        x.iter()
            .zip(&self.m)
            .map(|(v, m)| -w0 * v - w1 * (v - m) / self.sigma2)
            .collect()
    }

    /// `∇² log p(x)`.
    pub fn hessian_log_density(&self, x: &[f64]) -> DMatrix<f64> {
        let d = self.dim();
        let (w0, w1) = self.responsibilities(x);
        let g0 = DVector::from_iterator(d, x.iter().map(|v| -v));
        let g1 = DVector::from_iterator(
            d,
            x.iter().zip(&self.m).map(|(v, m)| -(v - m) / self.sigma2),
        );
        let g = &g0 * w0 + &g1 * w1;
        let mut h = DMatrix::identity(d, d) * -(w0 + w1 / self.sigma2);
        h += (&g0 * g0.transpose()) * w0 + (&g1 * g1.transpose()) * w1 - &g * g.transpose();
        h
    }
}

impl TargetModel for GaussianMixture {
    type State = Vec<f64>;

    fn log_density(&self, state: &Vec<f64>) -> f64 {
        GaussianMixture::log_density(self, state)
    }

    fn state_space(&self) -> StateSpace {
        StateSpace::Continuous(self.dim())
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Scale {
    Diagonal(Vec<f64>),
    Full(DMatrix<f64>),
}

/// `N(mean, cov)` with normalised log-density.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianProposal {
    mean: Vec<f64>,
    cov: DMatrix<f64>,
    scale: Scale,
    log_norm: f64,
}

impl GaussianProposal {
    pub fn new(mean: Vec<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let d = mean.len();
        if d == 0 || cov.nrows() != d || cov.ncols() != d {
            return Err(Error::Config(format!("covariance must be {d}x{d}")));
        }
        if (&cov - cov.transpose()).amax() > 1e-10 * cov.amax().max(1.0) {
            return Err(Error::Config("covariance must be symmetric".into()));
        }
        let chol = Cholesky::new(cov.clone())
            .ok_or_else(|| Error::Config("covariance is not positive definite".into()))?;
        let log_det = 2.0 * chol.l().diagonal().iter().map(|v| v.ln()).sum::<f64>();
        let is_diagonal = (0..d).all(|i| (0..d).all(|j| i == j || cov[(i, j)] == 0.0));
        let scale = if is_diagonal {
            Scale::Diagonal(cov.diagonal().iter().map(|v| v.sqrt()).collect())
        } else {
            Scale::Full(chol.l())
        };
        Ok(Self {
            mean,
            cov,
            scale,
            log_norm: -0.5 * (d as f64 * (2.0 * PI).ln() + log_det),
        })
    }

    pub fn standard(d: usize) -> Result<Self> {
        Self::new(vec![0.0; d], DMatrix::identity(d, d))
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.cov
    }

    pub fn log_density(&self, x: &[f64]) -> f64 {
        let quad = match &self.scale {
            Scale::Diagonal(s) => x
                .iter()
                .zip(&self.mean)
                .zip(s)
                .map(|((v, m), s)| ((v - m) / s).powi(2))
                .sum::<f64>(),
            Scale::Full(l) => {
                let r = DVector::from_iterator(
                    self.dim(),
                    x.iter().zip(&self.mean).map(|(v, m)| v - m),
                );
                let y = l
                    .solve_lower_triangular(&r)
                    .expect("Cholesky factor has a positive diagonal");
                y.norm_squared()
            }
        };
        self.log_norm - 0.5 * quad
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let z: Vec<f64> = (0..self.dim()).map(|_| rng.sample(StandardNormal)).collect();
        match &self.scale {
            Scale::Diagonal(s) => z
                .iter()
                .zip(s)
                .zip(&self.mean)
                .map(|((z, s), m)| m + s * z)
                .collect(),
            Scale::Full(l) => {
                let y = l * DVector::from_vec(z);
                y.iter().zip(&self.mean).map(|(y, m)| m + y).collect()
            }
        }
    }
}

impl VariationalModel for GaussianProposal {
    type State = Vec<f64>;

    fn log_density(&self, state: &Vec<f64>) -> f64 {
        GaussianProposal::log_density(self, state)
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        GaussianProposal::sample(self, rng)
    }
}

/// Gradient ascent settings for locating the mode.
#[derive(Debug, Clone, PartialEq)]
pub struct LaplaceOptions {
    pub step: f64,
    pub max_iters: usize,
    pub tolerance: f64,
    /// Starting point; the origin when `None`.
    pub init: Option<Vec<f64>>,
}

impl Default for LaplaceOptions {
    fn default() -> Self {
        Self {
            step: 0.1,
            max_iters: 10_000,
            tolerance: 1e-8,
            init: None,
        }
    }
}

/// Gradient descent on `−log p` to a mode `x*`, then
/// `N(x*, (−∇² log p(x*))^{-1})`.
pub fn laplace_approximation(
    mix: &GaussianMixture,
    opts: &LaplaceOptions,
) -> Result<GaussianProposal> {
    let d = mix.dim();
    let mut x = match &opts.init {
        Some(v) if v.len() == d => v.clone(),
        Some(v) => {
            return Err(Error::Config(format!(
                "initial point has dimension {}, expected {d}",
                v.len()
            )))
        }
        None => vec![0.0; d],
    };
    let norm = |g: &[f64]| g.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut g = mix.grad_log_density(&x);
    let mut iterations = 0;
    while norm(&g) > opts.tolerance {
        if iterations == opts.max_iters {
            return Err(Error::NonConvergence {
                iterations,
                gradient_norm: norm(&g),
                tolerance: opts.tolerance,
            });
        }
        for (xi, gi) in x.iter_mut().zip(&g) {
            *xi += opts.step * gi;
        }
        g = mix.grad_log_density(&x);
        iterations += 1;
    }
    log::debug!("mode found after {iterations} iterations");
    let precision = -mix.hessian_log_density(&x);
    let cov = precision
        .try_inverse()
        .ok_or_else(|| Error::InvalidState("Hessian at the mode is singular".into()))?;
    // symmetrise away rounding before the Cholesky check
    let cov = (&cov + cov.transpose()) * 0.5;
    GaussianProposal::new(x, cov).map_err(|_| {
        Error::InvalidState("stationary point is not a local maximum of the density".into())
    })
}

/// Random walk Metropolis with isotropic Gaussian increments.
#[derive(Debug, Clone)]
pub struct RandomWalkMetropolis<'a, T> {
    target: &'a T,
    step_size: f64,
    cache: Option<(Vec<f64>, f64)>,
    proposals: u64,
    accepted: u64,
}

impl<'a, T: TargetModel<State = Vec<f64>>> RandomWalkMetropolis<'a, T> {
    pub fn new(target: &'a T, step_size: f64) -> Result<Self> {
        if !(step_size > 0.0 && step_size.is_finite()) {
            return Err(Error::Config(format!("step size {step_size} must be positive")));
        }
        Ok(Self {
            target,
            step_size,
            cache: None,
            proposals: 0,
            accepted: 0,
        })
    }

    /// Step size `2.38 / √d`.
    pub fn default_step(d: usize) -> f64 {
        2.38 / (d as f64).sqrt()
    }

    pub fn step_size(&self) -> f64 {
        self.step_size
    }

    pub fn acceptance_rate(&self) -> f64 {
        if self.proposals == 0 {
            0.0
        } else {
            self.accepted as f64 / self.proposals as f64
        }
    }
}

impl<T: TargetModel<State = Vec<f64>>> MarkovKernel<Vec<f64>> for RandomWalkMetropolis<'_, T> {
    fn step<R: Rng + ?Sized>(&mut self, state: &mut Vec<f64>, rng: &mut R) {
        let current = match &self.cache {
            Some((x, lp)) if x == state => *lp,
            _ => self.target.log_density(state),
        };
        let proposal: Vec<f64> = state
            .iter()
            .map(|v| v + self.step_size * rng.sample::<f64, _>(StandardNormal))
            .collect();
        let lp = self.target.log_density(&proposal);
        let log_ratio = lp - current;
        self.proposals += 1;
        // NaN ratios (both densities -inf) are rejected
        let accept = log_ratio >= 0.0 || rng.random::<f64>().ln() < log_ratio;
        if accept {
            self.accepted += 1;
            *state = proposal;
            self.cache = Some((state.clone(), lp));
        } else {
            self.cache = Some((state.clone(), current));
        }
    }
}
