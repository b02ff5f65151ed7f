//! Brute-force moments of the chain, ideal, occluded and stratified
//! estimators by summing over every outcome. Exponential in the horizon, hence
//! the hard size caps.

use nalgebra::DVector;

use super::DiscreteSystem;
use crate::error::{Error, Result};

pub const MAX_ENUM_STATES: usize = 4;
pub const MAX_ENUM_LENGTH: usize = 4;
const MAX_STRATIFIED_DRAWS: usize = 2 * MAX_ENUM_LENGTH;

/// First two moments of an estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub mean: f64,
    pub variance: f64,
}

fn guard(sys: &DiscreteSystem, n: usize) -> Result<()> {
    if sys.state_count() > MAX_ENUM_STATES {
        return Err(Error::TooLarge {
            what: "states",
            value: sys.state_count(),
            limit: MAX_ENUM_STATES,
        });
    }
    if n > MAX_ENUM_LENGTH {
        return Err(Error::TooLarge {
            what: "chain length",
            value: n,
            limit: MAX_ENUM_LENGTH,
        });
    }
    if n == 0 {
        return Err(Error::Config("chain length must be at least 1".into()));
    }
    Ok(())
}

/// Accumulates `Σ w z` and `Σ w (z − centre)²`; centring at the known mean
/// keeps the variance free of cancellation.
struct Accumulator {
    centre: f64,
    first: f64,
    second: f64,
}

impl Accumulator {
    fn new(centre: f64) -> Self {
        Self {
            centre,
            first: 0.0,
            second: 0.0,
        }
    }

    fn add(&mut self, w: f64, z: f64) {
        self.first += w * z;
        self.second += w * (z - self.centre).powi(2);
    }

    fn finish(self) -> Moments {
        let bias = self.first - self.centre;
        Moments {
            mean: self.first,
            variance: self.second - bias * bias,
        }
    }
}

/// Calls `visit(path, weight)` for every length-`n` path with positive
/// probability under the stationary chain.
fn for_each_path<F: FnMut(&[usize], f64)>(sys: &DiscreteSystem, n: usize, mut visit: F) {
    fn rec<F: FnMut(&[usize], f64)>(
        sys: &DiscreteSystem,
        n: usize,
        path: &mut Vec<usize>,
        w: f64,
        visit: &mut F,
    ) {
        if path.len() == n {
            visit(path, w);
            return;
        }
        for y in 0..sys.state_count() {
            let step = match path.last() {
                None => sys.p()[y],
                Some(&x) => sys.k()[(x, y)],
            };
            if step > 0.0 {
                path.push(y);
                rec(sys, n, path, w * step, visit);
                path.pop();
            }
        }
    }
    rec(sys, n, &mut Vec::with_capacity(n), 1.0, &mut visit);
}

/// Calls `visit(weight, sum)` for every combination of per-time outcomes,
/// where `choices[t]` lists `(probability, value)` pairs for time `t`.
fn for_each_outcome<F: FnMut(f64, f64)>(choices: &[Vec<(f64, f64)>], mut visit: F) {
    fn rec<F: FnMut(f64, f64)>(choices: &[Vec<(f64, f64)>], w: f64, s: f64, visit: &mut F) {
        match choices.split_first() {
            None => visit(w, s),
            Some((head, rest)) => {
                for &(pw, v) in head {
                    rec(rest, w * pw, s + v, visit);
                }
            }
        }
    }
    rec(choices, 1.0, 0.0, &mut visit);
}

/// Moments of `(1/n) Σ g(X_t)`.
pub fn brute_force_chain(sys: &DiscreteSystem, g: &DVector<f64>, n: usize) -> Result<Moments> {
    guard(sys, n)?;
    let mut acc = Accumulator::new(sys.mean(g));
    for_each_path(sys, n, |path, w| {
        let z = path.iter().map(|&x| g[x]).sum::<f64>() / n as f64;
        acc.add(w, z);
    });
    Ok(acc.finish())
}

/// Per-time outcomes of `f(Z_t)` given `X_t = x`: keep `f(x)` with
/// probability `1 − α`, or draw `Y ~ P_ρ(x)` with probability `α`.
fn occlusion_choices(sys: &DiscreteSystem, restricted: &[Vec<f64>], x: usize, alpha: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    if alpha < 1.0 {
        out.push((1.0 - alpha, sys.f()[x]));
    }
    if alpha > 0.0 {
        let i = sys.regions()[x];
        for (y, &py) in restricted[i].iter().enumerate() {
            if py > 0.0 {
                out.push((alpha * py, sys.f()[y]));
            }
        }
    }
    out
}

fn occlusion_moments(sys: &DiscreteSystem, n: usize, alpha: &[f64]) -> Result<Moments> {
    guard(sys, n)?;
    let restricted: Vec<Vec<f64>> = (0..sys.region_count()).map(|i| sys.restricted(i)).collect();
    let mut acc = Accumulator::new(sys.mean(sys.f()));
    for_each_path(sys, n, |path, w| {
        let choices: Vec<_> = path
            .iter()
            .map(|&x| occlusion_choices(sys, &restricted, x, alpha[sys.regions()[x]]))
            .collect();
        for_each_outcome(&choices, |wy, s| acc.add(w * wy, s / n as f64));
    });
    Ok(acc.finish())
}

/// Moments of `μ̂_ideal`: every `X_t` replaced by an independent draw from
/// `P_ρ(X_t)`. Enumerates chain paths and all replacement draws.
pub fn brute_force_ideal(sys: &DiscreteSystem, n: usize) -> Result<Moments> {
    occlusion_moments(sys, n, &vec![1.0; sys.region_count()])
}

pub fn brute_force_ideal_variance(sys: &DiscreteSystem, n: usize) -> Result<f64> {
    Ok(brute_force_ideal(sys, n)?.variance)
}

/// Moments of `μ̂_occ` under the occlusion kernel started in equilibrium:
/// chain paths, occlusion indicators `S_t ~ Bernoulli(α(ρ(X_t)))` and
/// restricted draws `Y_t` all enumerated.
pub fn brute_force_occluded(sys: &DiscreteSystem, n: usize) -> Result<Moments> {
    occlusion_moments(sys, n, sys.alpha())
}

/// Moments of the stratified estimator with `allocation[i]` independent draws
/// from each `P_i`.
pub fn brute_force_stratified(sys: &DiscreteSystem, allocation: &[usize]) -> Result<Moments> {
    if allocation.len() != sys.region_count() {
        return Err(Error::Consistency("one allocation per region is required".into()));
    }
    if allocation.contains(&0) {
        return Err(Error::Empty("stratum allocation"));
    }
    let draws: usize = allocation.iter().sum();
    if sys.state_count() > MAX_ENUM_STATES || draws > MAX_STRATIFIED_DRAWS {
        return Err(Error::TooLarge {
            what: "stratified draws",
            value: draws,
            limit: MAX_STRATIFIED_DRAWS,
        });
    }
    let masses = sys.region_masses();
    let mut choices = Vec::with_capacity(draws);
    for (i, &ni) in allocation.iter().enumerate() {
        let scale = masses[i] / ni as f64;
        let per_draw: Vec<(f64, f64)> = sys
            .restricted(i)
            .into_iter()
            .enumerate()
            .filter(|(_, py)| *py > 0.0)
            .map(|(y, py)| (py, scale * sys.f()[y]))
            .collect();
        choices.extend(std::iter::repeat(per_draw).take(ni));
    }
    let mut acc = Accumulator::new(sys.mean(sys.f()));
    for_each_outcome(&choices, |w, s| acc.add(w, s));
    Ok(acc.finish())
}
