use nalgebra::{DMatrix, SymmetricEigen};

use super::variance::{chain_variance, ideal_variance_formula};
use super::DiscreteSystem;
use crate::error::{Error, Result};

const TOL: f64 = 1e-12;

/// Ideal-versus-chain variance comparison and the conditions under which the
/// ideal estimator is guaranteed to win.
#[derive(Debug, Clone, PartialEq)]
pub struct DominanceReport {
    pub n: usize,
    /// `Var((1/n) Σ f(X_t))`.
    pub chain_variance: f64,
    /// `Var((1/n) Σ →Pf(X_t))`.
    pub resolution_chain_variance: f64,
    pub ideal_variance: f64,
    /// Resolution chain variance does not exceed the chain variance.
    pub resolution_bound_holds: bool,
    /// `f = →Pf`.
    pub piecewise_constant: bool,
    /// `f = ←Pf + P(f)`, i.e. every region mean equals `P(f)`.
    pub centred_regions: bool,
    /// Smallest eigenvalue of the symmetrised `P`-weighted kernel.
    pub min_eigenvalue: f64,
    pub positive_kernel: bool,
    /// `Var(μ̂_ideal) ≤ Var((1/n) Σ f(X_t))`.
    pub dominance: bool,
}

impl DominanceReport {
    /// Either sufficient condition holds.
    pub fn sufficient_condition(&self) -> bool {
        self.piecewise_constant || (self.centred_regions && self.positive_kernel)
    }

    /// Dominance whenever a sufficient condition holds.
    pub fn consistent(&self) -> bool {
        !self.sufficient_condition() || self.dominance
    }
}

/// Eigenvalues, ascending, of the symmetric part of `D^{1/2} K D^{-1/2}` with
/// `D = diag(p)`. For a reversible kernel this is the spectrum of `K` on
/// `L²(P)`.
pub fn symmetrized_spectrum(sys: &DiscreteSystem) -> Result<Vec<f64>> {
    let m = sys.state_count();
    if sys.p().iter().any(|&x| x <= 0.0) {
        return Err(Error::InvalidState(
            "symmetrisation needs every state to have positive mass".into(),
        ));
    }
    let sqrt_p = sys.p().map(f64::sqrt);
    let a = DMatrix::from_fn(m, m, |i, j| sqrt_p[i] * sys.k()[(i, j)] / sqrt_p[j]);
    let s = (&a + a.transpose()) * 0.5;
    let mut ev: Vec<f64> = SymmetricEigen::new(s).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

pub fn variance_dominance_check(sys: &DiscreteSystem, n: usize) -> Result<DominanceReport> {
    let f = sys.f();
    let forward = sys.resolve(f);
    let chain = chain_variance(sys, f, n)?;
    let resolution_chain = chain_variance(sys, &forward, n)?;
    let ideal = ideal_variance_formula(sys, n)?;
    let mu = sys.mean(f);
    let min_eigenvalue = symmetrized_spectrum(sys)?[0];
    Ok(DominanceReport {
        n,
        chain_variance: chain,
        resolution_chain_variance: resolution_chain,
        ideal_variance: ideal,
        resolution_bound_holds: resolution_chain <= chain + TOL,
        piecewise_constant: (f - &forward).amax() <= TOL,
        centred_regions: forward.iter().all(|v| (v - mu).abs() <= TOL),
        min_eigenvalue,
        positive_kernel: min_eigenvalue >= -TOL,
        dominance: ideal <= chain + TOL,
    })
}
