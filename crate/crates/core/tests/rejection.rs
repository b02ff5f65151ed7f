use occlusion_core::discrete::{exact_regions, Tabulated};
use occlusion_core::{log_rn_derivative, rejection_attempt, RegionMap, RegionPartition};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn six_state() -> (Tabulated, Tabulated, RegionPartition) {
    let target = Tabulated::new(vec![0.5, 1.0, 3.0, 2.0, 4.0, 1.5]).unwrap();
    let proposal = Tabulated::new(vec![2.0, 1.0, 1.0, 1.0, 2.0, 1.0]).unwrap();
    // RN = (0.25, 1, 3, 2, 2, 1.5): region 0 is RN < 2, region 1 is RN >= 2,
    // so only region 0 (C_1 = 2) produces samples
    let partition = RegionPartition::new(&[2.0]).unwrap();
    (target, proposal, partition)
}

#[test]
fn log_rn_examples() {
    // third state: 0.3 / 0.25
    let p = Tabulated::new(vec![0.1, 0.2, 0.3, 0.4]).unwrap();
    let q = Tabulated::new(vec![0.25; 4]).unwrap();
    assert!((log_rn_derivative(&2, &p, &q).unwrap() - 1.2f64.ln()).abs() < 1e-15);
    assert_eq!(log_rn_derivative(&2, &p, &p).unwrap(), 0.0);
}

#[test]
fn region_index_examples() {
    let two = RegionPartition::new(&[1.0]).unwrap();
    assert_eq!(two.region_index(0.5).unwrap(), 0);
    assert_eq!(two.region_index(1.0).unwrap(), 1);
    let four = RegionPartition::new(&[1.0, 2.0, 5.0]).unwrap();
    assert_eq!(four.region_index(3.7).unwrap(), 2);
    assert!(four.region_index(f64::NAN).is_err());
}

#[test]
fn equal_densities_accept_half_below_threshold_two() {
    let p = Tabulated::new(vec![1.0, 1.0, 1.0]).unwrap();
    let part = RegionPartition::new(&[2.0]).unwrap();
    let map = RegionMap::new(&p, &p, &part);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let n = 100_000;
    let accepted = (0..n)
        .filter(|_| rejection_attempt(&map, &mut rng).unwrap().is_some())
        .count();
    let se = (0.25 / n as f64).sqrt();
    assert!((accepted as f64 / n as f64 - 0.5).abs() < 4.0 * se);

    let part = RegionPartition::new(&[1.0]).unwrap();
    let map = RegionMap::new(&p, &p, &part);
    assert!((0..1000).all(|_| rejection_attempt(&map, &mut rng).unwrap().is_none()));
}

#[test]
fn accepted_samples_follow_the_restricted_law() {
    let (target, proposal, partition) = six_state();
    let exact = exact_regions(&target, &proposal, &partition).unwrap();
    let map = RegionMap::new(&target, &proposal, &partition);
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut counts = [0usize; 6];
    let mut accepted = 0;
    while accepted < 100_000 {
        if let Some((region, y)) = rejection_attempt(&map, &mut rng).unwrap() {
            assert_eq!(region, 0);
            counts[y] += 1;
            accepted += 1;
        }
    }
    let tv: f64 = counts
        .iter()
        .zip(&exact.restricted[0])
        .map(|(&c, p)| (c as f64 / accepted as f64 - p).abs())
        .sum::<f64>()
        / 2.0;
    assert!(tv < 0.02, "TV = {tv}");
}

#[test]
fn per_attempt_acceptance_matches_closed_form() {
    let (target, proposal, _) = six_state();
    // three regions so that two of them produce samples
    let partition = RegionPartition::new(&[1.2, 2.5]).unwrap();
    let exact = exact_regions(&target, &proposal, &partition).unwrap();
    let map = RegionMap::new(&target, &proposal, &partition);
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let attempts = 1_000_000;
    let mut hits = vec![0usize; 3];
    for _ in 0..attempts {
        if let Some((region, _)) = rejection_attempt(&map, &mut rng).unwrap() {
            hits[region] += 1;
        }
    }
    for (i, (&h, &p)) in hits.iter().zip(&exact.acceptance).enumerate() {
        let rate = h as f64 / attempts as f64;
        let se = (p * (1.0 - p) / attempts as f64).sqrt();
        assert!(
            (rate - p).abs() <= 3.0 * se.max(1e-12),
            "region {i}: rate {rate}, expected {p}"
        );
    }
    assert_eq!(hits[2], 0);
}
