use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

use super::DiscreteSystem;
use crate::error::{Error, Result};

/// Metropolis kernel for `p` from a symmetric proposal matrix whose rows sum
/// to at most one; leftover mass stays put.
pub fn metropolis_kernel(p: &[f64], proposal: &DMatrix<f64>) -> DMatrix<f64> {
    let m = p.len();
    let mut k = DMatrix::zeros(m, m);
    for x in 0..m {
        let mut stay = 1.0;
        for y in 0..m {
            if x != y {
                let t = proposal[(x, y)] * (p[y] / p[x]).min(1.0);
                k[(x, y)] = t;
                stay -= t;
            }
        }
        k[(x, x)] = stay;
    }
    k
}

/// `(I + K) / 2`: positive on `L²(P)` whenever `K` is reversible.
pub fn lazy(k: &DMatrix<f64>) -> DMatrix<f64> {
    (DMatrix::identity(k.nrows(), k.ncols()) + k) * 0.5
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RandomSystemSpec {
    pub states: usize,
    pub regions: usize,
    /// Use the lazy (positive) version of the Metropolis kernel.
    pub lazy: bool,
}

/// A random reversible system: `p` bounded away from zero, a Metropolis
/// kernel from a random symmetric proposal, Gaussian `f`, random `α`, and
/// every region non-empty.
pub fn random_system<R: Rng + ?Sized>(spec: RandomSystemSpec, rng: &mut R) -> Result<DiscreteSystem> {
    let RandomSystemSpec {
        states: m,
        regions: r,
        lazy: use_lazy,
    } = spec;
    if r == 0 || r > m {
        return Err(Error::Config(format!("cannot place {r} regions on {m} states")));
    }
    let mut p: Vec<f64> = (0..m).map(|_| 0.1 + rng.random::<f64>()).collect();
    let total: f64 = p.iter().sum();
    p.iter_mut().for_each(|x| *x /= total);

    let raw = DMatrix::from_fn(m, m, |_, _| rng.random::<f64>());
    let sym = (&raw + raw.transpose()) * 0.5;
    let max_row = sym.row_iter().map(|row| row.sum()).fold(0.0, f64::max);
    let mut k = metropolis_kernel(&p, &(sym / max_row));
    if use_lazy {
        k = lazy(&k);
    }

    let f: Vec<f64> = (0..m).map(|_| rng.sample(StandardNormal)).collect();
    let mut regions: Vec<usize> = (0..m)
        .map(|x| if x < r { x } else { rng.random_range(0..r) })
        .collect();
    regions.shuffle(rng);
    let alpha = (0..r).map(|_| rng.random::<f64>()).collect();
    DiscreteSystem::from_parts(
        DVector::from_vec(p),
        k,
        DVector::from_vec(f),
        regions,
        alpha,
    )
}

/// Two equally likely states, the deterministic swap kernel, `f = (1, −1)`
/// and the trivial partition. The chain estimator at `n = 2` is exact while
/// the ideal estimator is plain Monte Carlo.
pub fn antithetic_witness() -> DiscreteSystem {
    DiscreteSystem::new(
        vec![0.5, 0.5],
        vec![vec![0.0, 1.0], vec![1.0, 0.0]],
        vec![1.0, -1.0],
        vec![0, 0],
        vec![1.0],
    )
    .expect("witness system is valid")
}
