use occlusion_core::gaussian::{
    laplace_approximation, GaussianMixture, GaussianProposal, LaplaceOptions, RandomWalkMetropolis,
};
use occlusion_core::{
    acf, run_occlusion, MarkovKernel, RegionMap, RegionPartition, RunConfig, StopCondition,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn bimodal(d: usize) -> GaussianMixture {
    GaussianMixture::with_first_coordinate(d, 0.1, 2.5, 0.05).unwrap()
}

#[test]
fn rwm_acceptance_rate_in_sanity_band() {
    let mix = bimodal(1);
    let mut k = RandomWalkMetropolis::new(&mix, RandomWalkMetropolis::<GaussianMixture>::default_step(1)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut x = vec![0.0];
    for _ in 0..100_000 {
        k.step(&mut x, &mut rng);
    }
    let a = k.acceptance_rate();
    assert!(a > 0.2 && a < 0.6, "acceptance {a}");
}

#[test]
fn upper_region_is_an_interval_around_the_narrow_mode() {
    let mix = bimodal(1);
    let q = GaussianProposal::standard(1).unwrap();
    let part = RegionPartition::new(&[1.0]).unwrap();
    let map = RegionMap::new(&mix, &q, &part);
    let mut inside = 0;
    for i in 0..=20_000 {
        let x = -10.0 + i as f64 * 1e-3;
        if map.region_of(&vec![x]).unwrap() == 1 {
            assert!((1.5..=3.5).contains(&x), "x = {x} in upper region");
            inside += 1;
        }
    }
    assert!(inside > 0);
}

#[test]
fn five_point_restriction_is_reversible() {
    let mix = bimodal(1);
    let points = [-1.0, 0.0, 1.0, 2.5, 3.0];
    let step = 2.38;
    let log_pi: Vec<f64> = points.iter().map(|&x| mix.log_density(&vec![x])).collect();
    let z: f64 = log_pi.iter().map(|l| l.exp()).sum();
    let pi: Vec<f64> = log_pi.iter().map(|l| l.exp() / z).collect();
    let proposal = |a: f64, b: f64| (-(a - b) * (a - b) / (2.0 * step * step)).exp();
    let scale = points
        .iter()
        .map(|&a| points.iter().map(|&b| proposal(a, b)).sum::<f64>())
        .fold(0.0, f64::max);
    let mut k = [[0.0; 5]; 5];
    for i in 0..5 {
        let mut stay = 1.0;
        for j in 0..5 {
            if i != j {
                let accept = (log_pi[j] - log_pi[i]).min(0.0).exp();
                k[i][j] = proposal(points[i], points[j]) / scale * accept;
                stay -= k[i][j];
            }
        }
        k[i][i] = stay;
    }
    for i in 0..5 {
        for j in 0..5 {
            assert!((pi[i] * k[i][j] - pi[j] * k[j][i]).abs() < 1e-12);
        }
    }
}

#[test]
fn laplace_in_one_dimension_is_standard_normal() {
    let q = laplace_approximation(&bimodal(1), &LaplaceOptions::default()).unwrap();
    assert!(q.mean()[0].abs() < 1e-3);
    assert!((q.covariance()[(0, 0)] - 1.0).abs() < 1e-2);
}

#[test]
fn occlusion_lowers_lag_one_autocorrelation_in_one_dimension() {
    let mix = bimodal(1);
    let q = GaussianProposal::standard(1).unwrap();
    let part = RegionPartition::new(&[1.0]).unwrap();
    let map = RegionMap::new(&mix, &q, &part);
    let config = RunConfig {
        workers: 6,
        stop: StopCondition::FixedAttempts {
            chain_steps: 10_000,
            attempts_per_worker: 2_000,
        },
        seed: 77,
        deterministic: true,
    };
    let kernel = RandomWalkMetropolis::new(&mix, 2.38).unwrap();
    let run = run_occlusion(kernel, vec![0.0], &map, |x| x[0], &config).unwrap();
    let chain: Vec<f64> = run.trace.states().iter().map(|x| x[0]).collect();
    let occluded: Vec<f64> = run.result.occluded_states.iter().map(|x| x[0]).collect();
    let a = acf(&chain, 1).unwrap().lag(1).unwrap();
    let b = acf(&occluded, 1).unwrap().lag(1).unwrap();
    assert!(b < a, "occluded {b} vs chain {a}");
    assert!(run.result.occlusion_proportion > 0.0);
}
