use nalgebra::{DMatrix, DVector};

use super::DiscreteSystem;
use crate::error::{Error, Result};

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::Config("chain length must be at least 1".into()))
    } else {
        Ok(())
    }
}

/// `Cov_P(g, K^k g)` for `k = 0..n`.
fn autocovariances(sys: &DiscreteSystem, g: &DVector<f64>, n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    let mut kg = g.clone();
    for k in 0..n {
        if k > 0 {
            kg = sys.k() * kg;
        }
        out.push(sys.cov(g, &kg));
    }
    out
}

fn weighted_sum(c: &[f64], n: usize) -> f64 {
    let nf = n as f64;
    c.iter()
        .enumerate()
        .skip(1)
        .map(|(k, ck)| (nf - k as f64) / nf * ck)
        .sum()
}

/// Exact `Var((1/n) Σ g(X_t))` for the stationary chain.
pub fn chain_variance(sys: &DiscreteSystem, g: &DVector<f64>, n: usize) -> Result<f64> {
    check_n(n)?;
    let c = autocovariances(sys, g, n);
    Ok((c[0] + 2.0 * weighted_sum(&c, n)) / n as f64)
}

/// `(1/n) Var_P(←Pf) + Var((1/n) Σ →Pf(X_t))`.
pub fn ideal_variance_formula(sys: &DiscreteSystem, n: usize) -> Result<f64> {
    check_n(n)?;
    let forward = sys.resolve(sys.f());
    let orthogonal = sys.f() - &forward;
    Ok(sys.var(&orthogonal) / n as f64 + chain_variance(sys, &forward, n)?)
}

/// The two pieces of the stated occluded-variance formula.
#[derive(Debug, Clone, PartialEq)]
pub struct OccludedTerms {
    pub n: usize,
    pub ideal: f64,
    /// `c[k - 1] = C_k` for `k = 1..n-1`, with
    /// `C_k = Cov_P(f_a, K^k f_a) − Cov_P(→Pf_a, K^k →Pf_a)` and
    /// `f_a = (1 − α(ρ(·))) f`.
    pub c: Vec<f64>,
}

impl OccludedTerms {
    /// `ideal + (2/n) Σ_k ((n − k)/n) C_k`.
    pub fn total(&self) -> f64 {
        let nf = self.n as f64;
        let s: f64 = self
            .c
            .iter()
            .enumerate()
            .map(|(i, ck)| (nf - (i + 1) as f64) / nf * ck)
            .sum();
        self.ideal + 2.0 * s / nf
    }
}

pub fn occluded_variance_terms(sys: &DiscreteSystem, n: usize) -> Result<OccludedTerms> {
    let ideal = ideal_variance_formula(sys, n)?;
    let fa = (DVector::from_element(sys.state_count(), 1.0) - sys.alpha_by_state())
        .component_mul(sys.f());
    let ga = sys.resolve(&fa);
    let cf = autocovariances(sys, &fa, n);
    let cg = autocovariances(sys, &ga, n);
    let c = (1..n).map(|k| cf[k] - cg[k]).collect();
    Ok(OccludedTerms { n, ideal, c })
}

/// The occluded-variance formula exactly as stated, with the `C_k`
/// correction terms. Agrees with [`occluded_variance_exact`] when `α ≡ 0`,
/// `α ≡ 1` or `n = 1`; in general it does not.
pub fn occluded_variance_formula(sys: &DiscreteSystem, n: usize) -> Result<f64> {
    Ok(occluded_variance_terms(sys, n)?.total())
}

/// Exact variance of the occluded estimator for the occlusion kernel in
/// equilibrium. Conditioning on the chain path,
/// `E[f(Z_t) | X] = h(X_t)` with `h = (1 − α_ρ) f + α_ρ →Pf`, and the `Z_t`
/// are conditionally independent with variance
/// `v = (1 − α_ρ) f² + α_ρ →P(f²) − h²`, so
/// `Var(μ̂_occ) = P(v)/n + Var((1/n) Σ h(X_t))`.
pub fn occluded_variance_exact(sys: &DiscreteSystem, n: usize) -> Result<f64> {
    check_n(n)?;
    let f = sys.f();
    let a = sys.alpha_by_state();
    let one_minus_a = DVector::from_element(sys.state_count(), 1.0) - &a;
    let forward = sys.resolve(f);
    let h = one_minus_a.component_mul(f) + a.component_mul(&forward);
    let f2 = f.component_mul(f);
    let forward_f2 = sys.resolve(&f2);
    let v = one_minus_a.component_mul(&f2) + a.component_mul(&forward_f2) - h.component_mul(&h);
    Ok(sys.mean(&v) / n as f64 + chain_variance(sys, &h, n)?)
}

/// `Σ_{k≥1} Cov_P(g, K^k g)` through the fundamental matrix
/// `Z = (I − K + 1 pᵀ)^{-1}`. Needs an ergodic kernel.
fn summed_autocovariance(sys: &DiscreteSystem, g: &DVector<f64>) -> Result<f64> {
    let m = sys.state_count();
    let ones = DVector::from_element(m, 1.0);
    let a = DMatrix::identity(m, m) - sys.k() + &ones * sys.p().transpose();
    let z = a.try_inverse().ok_or_else(|| {
        Error::InvalidState("kernel is not ergodic: fundamental matrix is singular".into())
    })?;
    let centred = g - ones * sys.mean(g);
    let tail = &z * &centred - &centred;
    Ok(sys.p().dot(&centred.component_mul(&tail)))
}

/// `lim n Var(μ̂_occ) = Var_P(f) + 2 Σ_k (Cov_P(→Pf, K^k →Pf) + C_k)`.
pub fn asymptotic_occluded_variance(sys: &DiscreteSystem) -> Result<f64> {
    let f = sys.f();
    let forward = sys.resolve(f);
    let fa = (DVector::from_element(sys.state_count(), 1.0) - sys.alpha_by_state())
        .component_mul(f);
    let ga = sys.resolve(&fa);
    let s = summed_autocovariance(sys, &forward)? + summed_autocovariance(sys, &fa)?
        - summed_autocovariance(sys, &ga)?;
    Ok(sys.var(f) + 2.0 * s)
}
