use nalgebra::DVector;

use super::DiscreteSystem;
use crate::error::{Error, Result};

/// `→Pf` and `←Pf = f − →Pf`, one entry per state.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolutionPair {
    pub forward: Vec<f64>,
    pub orthogonal: Vec<f64>,
}

pub fn resolution(sys: &DiscreteSystem) -> Result<ResolutionPair> {
    if let Some(region) = sys.region_masses().iter().position(|&w| w <= 0.0) {
        return Err(Error::ZeroMassRegion { region });
    }
    let forward = sys.resolve(sys.f());
    let orthogonal = sys.f() - &forward;
    Ok(ResolutionPair {
        forward: forward.as_slice().to_vec(),
        orthogonal: orthogonal.as_slice().to_vec(),
    })
}

/// `Σ_i (P(X_i) / n_i) Σ_j f(Y_ij)` where `n_i` is the length of `samples[i]`.
pub fn stratified_estimate<S, F: Fn(&S) -> f64>(
    samples: &[Vec<S>],
    weights: &[f64],
    f: F,
) -> Result<f64> {
    if samples.len() != weights.len() {
        return Err(Error::Consistency(format!(
            "{} strata of samples but {} weights",
            samples.len(),
            weights.len()
        )));
    }
    let mut total = 0.0;
    for (ys, w) in samples.iter().zip(weights) {
        if ys.is_empty() {
            return Err(Error::Empty("stratum sample"));
        }
        total += w * ys.iter().map(&f).sum::<f64>() / ys.len() as f64;
    }
    Ok(total)
}

/// `Σ_i P(X_i)² σ_i² / n_i`.
pub fn stratified_variance_formula(sys: &DiscreteSystem, allocation: &[usize]) -> Result<f64> {
    if allocation.len() != sys.region_count() {
        return Err(Error::Consistency("one allocation per region is required".into()));
    }
    if allocation.contains(&0) {
        return Err(Error::Empty("stratum allocation"));
    }
    let masses = sys.region_masses();
    let means = sys.resolve(sys.f());
    let mut within = vec![0.0; sys.region_count()];
    for (x, &i) in sys.regions().iter().enumerate() {
        within[i] += sys.p()[x] * (sys.f()[x] - means[x]).powi(2);
    }
    Ok((0..sys.region_count())
        .map(|i| masses[i] * within[i] / allocation[i] as f64)
        .sum())
}

/// `n_i = P(X_i) n`, required to be integral (within `1e-9`).
pub fn proportional_allocation(sys: &DiscreteSystem, n: usize) -> Result<Vec<usize>> {
    sys.region_masses()
        .iter()
        .enumerate()
        .map(|(i, w)| {
            let ni = w * n as f64;
            let r = ni.round();
            if (ni - r).abs() > 1e-9 || r < 1.0 {
                Err(Error::Config(format!(
                    "region {i}: P(X_i) n = {ni} is not a positive integer"
                )))
            } else {
                Ok(r as usize)
            }
        })
        .collect()
}

/// Both sides of `Var(μ̂_prop) = (1 − Corr_P(f, →Pf)²) Var(μ̂)` with
/// `Var(μ̂_prop) = Var_P(←Pf)/n` and `Var(μ̂) = Var_P(f)/n`. A constant `f`
/// gives `(0, 0)`.
pub fn proportional_variance_identity(sys: &DiscreteSystem, n: usize) -> Result<(f64, f64)> {
    if n == 0 {
        return Err(Error::Config("sample size must be at least 1".into()));
    }
    let f = sys.f();
    let var_f = sys.var(f);
    if var_f <= 0.0 {
        return Ok((0.0, 0.0));
    }
    let forward = sys.resolve(f);
    let orthogonal: DVector<f64> = f - &forward;
    let var_fwd = sys.var(&forward);
    let corr2 = if var_fwd <= 0.0 {
        0.0
    } else {
        sys.cov(f, &forward).powi(2) / (var_f * var_fwd)
    };
    let n = n as f64;
    Ok((sys.var(&orthogonal) / n, (1.0 - corr2) * var_f / n))
}
