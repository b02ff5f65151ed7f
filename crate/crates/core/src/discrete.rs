//! Finite state spaces `{0, …, m-1}` with tabulated densities. Small enough to
//! compute every restricted law exactly, which makes them the reference
//! instances for the rejection sampler and the occlusion postprocessing.

use rand::Rng;

use crate::error::{Error, Result};
use crate::model::{MarkovKernel, StateSpace, TargetModel, VariationalModel};
use crate::partition::RegionPartition;

/// A distribution on `{0, …, m-1}` given by unnormalised weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Tabulated {
    weights: Vec<f64>,
    log_weights: Vec<f64>,
    cumulative: Vec<f64>,
}

impl Tabulated {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Empty("tabulated weights"));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::Config(
                "tabulated weights must be finite and strictly positive".into(),
            ));
        }
        let log_weights = weights.iter().map(|w| w.ln()).collect();
        let mut acc = 0.0;
        let cumulative = weights
            .iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        Ok(Self {
            weights,
            log_weights,
            cumulative,
        })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Normalising constant `Z = Σ w`.
    pub fn normalizer(&self) -> f64 {
        *self.cumulative.last().expect("non-empty")
    }

    pub fn probabilities(&self) -> Vec<f64> {
        let z = self.normalizer();
        self.weights.iter().map(|w| w / z).collect()
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u = rng.random::<f64>() * self.normalizer();
        self.cumulative
            .partition_point(|&c| c <= u)
            .min(self.weights.len() - 1)
    }
}

impl TargetModel for Tabulated {
    type State = usize;

    fn log_density(&self, state: &usize) -> f64 {
        self.log_weights
            .get(*state)
            .copied()
            .unwrap_or(f64::NEG_INFINITY)
    }

    fn state_space(&self) -> StateSpace {
        StateSpace::Finite(self.len())
    }
}

impl VariationalModel for Tabulated {
    type State = usize;

    fn log_density(&self, state: &usize) -> f64 {
        TargetModel::log_density(self, state)
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.draw(rng)
    }
}

/// Exact region masses `P(X_i)` and restricted laws `P_i` of `target` under
/// the partition induced with `proposal`.
#[derive(Debug, Clone)]
pub struct ExactRegions {
    /// Region of each state.
    pub regions: Vec<usize>,
    /// `P(X_i)`, normalised.
    pub masses: Vec<f64>,
    /// `P_i` as a full-length probability vector per region.
    pub restricted: Vec<Vec<f64>>,
    /// Per-attempt probability that the restricted rejection sampler returns a
    /// region-`i` sample: `(Z_P / Z_Q) P(X_i) / C_{i+1}`, zero for the last region.
    pub acceptance: Vec<f64>,
}

pub fn exact_regions(
    target: &Tabulated,
    proposal: &Tabulated,
    partition: &RegionPartition,
) -> Result<ExactRegions> {
    if target.len() != proposal.len() {
        return Err(Error::Config("target and proposal sizes differ".into()));
    }
    let r = partition.region_count();
    let p = target.probabilities();
    let mut regions = Vec::with_capacity(p.len());
    let mut masses = vec![0.0; r];
    for (x, px) in p.iter().enumerate() {
        let log_rn = target.log_weights[x] - proposal.log_weights[x];
        let i = partition.region_index_log(log_rn)?;
        regions.push(i);
        masses[i] += px;
    }
    let restricted = (0..r)
        .map(|i| {
            p.iter()
                .zip(&regions)
                .map(|(px, &ri)| {
                    if ri == i && masses[i] > 0.0 {
                        px / masses[i]
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect();
    let ratio = target.normalizer() / proposal.normalizer();
    let acceptance = (0..r)
        .map(|i| ratio * masses[i] * (-partition.log_upper(i)).exp())
        .collect();
    Ok(ExactRegions {
        regions,
        masses,
        restricted,
        acceptance,
    })
}

/// Metropolis kernel on `{0, …, m-1}` with a uniform proposal over the other
/// states. Reversible with respect to the target.
#[derive(Debug, Clone)]
pub struct DiscreteMetropolis<'a> {
    target: &'a Tabulated,
}

impl<'a> DiscreteMetropolis<'a> {
    pub fn new(target: &'a Tabulated) -> Self {
        Self { target }
    }

    /// Exact transition matrix, row-major.
    pub fn transition_matrix(&self) -> Vec<Vec<f64>> {
        let m = self.target.len();
        let w = self.target.weights();
        let mut k = vec![vec![0.0; m]; m];
        if m == 1 {
            k[0][0] = 1.0;
            return k;
        }
        for x in 0..m {
            let mut stay = 1.0;
            for y in 0..m {
                if x != y {
                    let t = (w[y] / w[x]).min(1.0) / (m - 1) as f64;
                    k[x][y] = t;
                    stay -= t;
                }
            }
            k[x][x] = stay;
        }
        k
    }
}

impl MarkovKernel<usize> for DiscreteMetropolis<'_> {
    fn step<R: Rng + ?Sized>(&mut self, state: &mut usize, rng: &mut R) {
        let m = self.target.len();
        if m < 2 {
            return;
        }
        let mut y = rng.random_range(0..m - 1);
        if y >= *state {
            y += 1;
        }
        let log_ratio = self.target.log_weights[y] - self.target.log_weights[*state];
        if log_ratio >= 0.0 || rng.random::<f64>().ln() < log_ratio {
            *state = y;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::log_rn_derivative;

    #[test]
    fn log_rn_from_tables() {
        let p = Tabulated::new(vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let q = Tabulated::new(vec![0.25; 4]).unwrap();
        let v = log_rn_derivative(&2usize, &p, &q).unwrap();
        assert!((v - 1.2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn identical_tables_give_zero_log_rn() {
        let p = Tabulated::new(vec![1.0, 3.0, 2.0]).unwrap();
        for x in 0..3 {
            assert_eq!(log_rn_derivative(&x, &p, &p).unwrap(), 0.0);
        }
    }

    #[test]
    fn out_of_range_state_is_invalid() {
        let p = Tabulated::new(vec![1.0, 3.0]).unwrap();
        assert!(log_rn_derivative(&7usize, &p, &p).is_err());
    }

    #[test]
    fn metropolis_matrix_is_reversible() {
        let p = Tabulated::new(vec![0.5, 1.0, 2.5, 0.7]).unwrap();
        let pi = p.probabilities();
        let k = DiscreteMetropolis::new(&p).transition_matrix();
        for x in 0..4 {
            assert!((k[x].iter().sum::<f64>() - 1.0).abs() < 1e-14);
            for y in 0..4 {
                assert!((pi[x] * k[x][y] - pi[y] * k[y][x]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn exact_acceptance_uses_region_constants() {
        let p = Tabulated::new(vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let q = Tabulated::new(vec![2.5; 4]).unwrap();
        // RN = (0.4, 0.8, 1.2, 1.6)
        let part = RegionPartition::new(&[1.0, 1.5]).unwrap();
        let ex = exact_regions(&p, &q, &part).unwrap();
        assert_eq!(ex.regions, vec![0, 0, 1, 2]);
        assert!((ex.masses[0] - 0.3).abs() < 1e-15);
        assert!((ex.acceptance[0] - 0.3).abs() < 1e-15);
        assert!((ex.acceptance[1] - 0.3 / 1.5).abs() < 1e-15);
        assert_eq!(ex.acceptance[2], 0.0);
    }
}
