//! Sample autocorrelation with the biased (divide by `n`) normalisation.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct AcfResult {
    /// `values[0] = 1`, then lags `1..=max_lag`.
    pub values: Vec<f64>,
    /// The series was constant; every lag beyond 0 is reported as 0.
    pub degenerate: bool,
}

impl AcfResult {
    pub fn lag(&self, k: usize) -> Option<f64> {
        self.values.get(k).copied()
    }
}

pub fn acf(series: &[f64], max_lag: usize) -> Result<AcfResult> {
    let n = series.len();
    if n == 0 {
        return Err(Error::Empty("series"));
    }
    if n <= max_lag {
        return Err(Error::Config(format!(
            "series of length {n} is too short for lag {max_lag}"
        )));
    }
    if series.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidState("series contains non-finite values".into()));
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let centred: Vec<f64> = series.iter().map(|x| x - mean).collect();
    let c0 = centred.iter().map(|x| x * x).sum::<f64>();
    if c0 == 0.0 {
        let mut values = vec![0.0; max_lag + 1];
        values[0] = 1.0;
        return Ok(AcfResult {
            values,
            degenerate: true,
        });
    }
    let values = (0..=max_lag)
        .map(|k| {
            centred[..n - k]
                .iter()
                .zip(&centred[k..])
                .map(|(a, b)| a * b)
                .sum::<f64>()
                / c0
        })
        .collect();
    Ok(AcfResult {
        values,
        degenerate: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn iid_signs_are_uncorrelated() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let xs: Vec<f64> = (0..100_000)
            .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
            .collect();
        let r = acf(&xs, 5).unwrap();
        assert_eq!(r.values[0], 1.0);
        assert!(r.values[1].abs() < 0.02);
    }

    #[test]
    fn alternating_series_is_antithetic() {
        let xs: Vec<f64> = (0..1000).map(|t| if t % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let r = acf(&xs, 2).unwrap();
        // biased normalisation gives -(n-1)/n
        assert!((r.values[1] + 0.999).abs() < 1e-12);
        assert!((r.values[2] - 0.998).abs() < 1e-12);
    }

    #[test]
    fn ar1_lag_one_matches_coefficient() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let mut x = 0.0;
        let xs: Vec<f64> = (0..200_000)
            .map(|_| {
                x = 0.9 * x + rng.sample::<f64, _>(rand_distr::StandardNormal);
                x
            })
            .collect();
        let r = acf(&xs, 1).unwrap();
        assert!((r.values[1] - 0.9).abs() < 0.02, "{}", r.values[1]);
    }

    #[test]
    fn constant_series_is_flagged() {
        let r = acf(&[3.0; 50], 4).unwrap();
        assert!(r.degenerate);
        assert_eq!(r.values, vec![1.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn short_series_is_rejected() {
        assert!(acf(&[1.0, 2.0], 2).is_err());
        assert!(acf(&[], 0).is_err());
    }
}
