use occlusion_core::discrete::{exact_regions, DiscreteMetropolis, Tabulated};
use occlusion_core::runtime::seed_stream;
use occlusion_core::{
    apply_plan, ideal_estimate, occlude, occlude_checked, occluded_estimate, plan_occlusion,
    run_occlusion, ChainTrace, OcclusionPlan, RegionMap, RegionPartition, RestrictedPool,
    RunConfig, StopCondition,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Three states, regions {0, 1} and {2}.
struct Toy {
    p: [f64; 3],
    f: [f64; 3],
    regions: [usize; 3],
}

const TOY: Toy = Toy {
    p: [0.2, 0.3, 0.5],
    f: [1.0, -2.0, 4.0],
    regions: [0, 0, 1],
};

impl Toy {
    fn mass(&self, i: usize) -> f64 {
        (0..3).filter(|&x| self.regions[x] == i).map(|x| self.p[x]).sum()
    }

    fn restricted(&self, i: usize, x: usize) -> f64 {
        if self.regions[x] == i {
            self.p[x] / self.mass(i)
        } else {
            0.0
        }
    }

    fn mean(&self) -> f64 {
        (0..3).map(|x| self.p[x] * self.f[x]).sum()
    }

    /// Next region from a 2×2 matrix that keeps the region masses stationary,
    /// next state drawn afresh from the restricted law.
    fn refreshing_kernel(&self) -> [[f64; 3]; 3] {
        let (m0, m1) = (self.mass(0), self.mass(1));
        let leave0 = 0.3;
        let leave1 = leave0 * m0 / m1;
        let a = [[1.0 - leave0, leave0], [leave1, 1.0 - leave1]];
        let mut k = [[0.0; 3]; 3];
        for x in 0..3 {
            for y in 0..3 {
                k[x][y] = (0..2)
                    .map(|j| a[self.regions[x]][j] * self.restricted(j, y))
                    .sum();
            }
        }
        k
    }

    /// Reversible kernel where state 0 leaves its region far more often than
    /// state 1, built from a symmetric flow matrix `p_x K(x, y)`.
    fn uneven_exit_kernel(&self) -> [[f64; 3]; 3] {
        let flow = [[0.0, 0.05, 0.1], [0.05, 0.0, 0.01], [0.1, 0.01, 0.0]];
        let mut k = [[0.0; 3]; 3];
        for x in 0..3 {
            let mut stay = 1.0;
            for y in 0..3 {
                if x != y {
                    k[x][y] = flow[x][y] / self.p[x];
                    stay -= k[x][y];
                }
            }
            k[x][x] = stay;
        }
        k
    }
}

fn subsets(times: &[usize], size: usize) -> Vec<Vec<usize>> {
    (0u32..1 << times.len())
        .filter(|m| m.count_ones() as usize == size)
        .map(|m| {
            times
                .iter()
                .enumerate()
                .filter(|(b, _)| m >> b & 1 == 1)
                .map(|(_, &t)| t)
                .collect()
        })
        .collect()
}

/// All ordered tuples of `len` states from region `i`, with their probability
/// under the restricted law.
fn pool_tuples(toy: &Toy, i: usize, len: usize) -> Vec<(Vec<usize>, f64)> {
    let mut out = vec![(Vec::new(), 1.0)];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|(t, w)| {
                (0..3)
                    .filter(move |&x| toy.regions[x] == i)
                    .map(move |x| {
                        let mut t = t.clone();
                        t.push(x);
                        (t, w * toy.restricted(i, x))
                    })
            })
            .collect();
    }
    out
}

/// `E[(1/n) Σ f(Z_t)]` for the postprocessing step, summing over stationary
/// chain paths of length 3, independent pool sizes uniform on `{0..=3}` per
/// region, pool contents and occluded subsets.
fn enumerate_postprocessing(toy: &Toy, k: [[f64; 3]; 3]) -> f64 {
    let mut expectation = 0.0;
    let mut total = 0.0;
    for x0 in 0..3 {
        for x1 in 0..3 {
            for x2 in 0..3 {
                let wp = toy.p[x0] * k[x0][x1] * k[x1][x2];
                if wp == 0.0 {
                    continue;
                }
                let path = vec![x0, x1, x2];
                let regs: Vec<usize> = path.iter().map(|&x| toy.regions[x]).collect();
                let trace = ChainTrace::from_parts(path, regs, 2).unwrap();
                let times = trace.visit_times();
                for n0 in 0..=3usize {
                    for n1 in 0..=3usize {
                        let wn = wp / 16.0;
                        let plans0 = subsets(&times[0], n0.min(times[0].len()));
                        let plans1 = subsets(&times[1], n1.min(times[1].len()));
                        let wplan = wn / (plans0.len() * plans1.len()) as f64;
                        for (y0, w0) in pool_tuples(toy, 0, n0) {
                            for (y1, w1) in pool_tuples(toy, 1, n1) {
                                let pools = RestrictedPool::from_regions(vec![y0.clone(), y1]);
                                for s0 in &plans0 {
                                    for s1 in &plans1 {
                                        let plan = OcclusionPlan {
                                            selected: vec![s0.clone(), s1.clone()],
                                        };
                                        let res = apply_plan(&trace, &pools, &plan).unwrap();
                                        let est = occluded_estimate(|&x| toy.f[x], &res).unwrap();
                                        let w = wplan * w0 * w1;
                                        expectation += w * est;
                                        total += w;
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    assert!((total - 1.0).abs() < 1e-12, "weights sum to {total}");
    expectation
}

#[test]
fn refreshing_kernel_is_invariant() {
    let k = TOY.refreshing_kernel();
    for y in 0..3 {
        let py: f64 = (0..3).map(|x| TOY.p[x] * k[x][y]).sum();
        assert!((py - TOY.p[y]).abs() < 1e-15);
    }
}

#[test]
fn postprocessing_is_unbiased_for_region_refreshing_chain() {
    let e = enumerate_postprocessing(&TOY, TOY.refreshing_kernel());
    assert!((e - TOY.mean()).abs() < 1e-12, "E = {e}, P(f) = {}", TOY.mean());
}

#[test]
fn postprocessing_is_biased_when_exit_rates_differ_within_a_region() {
    // How many visits a region gets correlates with which state the chain
    // sits in, so occlusion rates differ between states of the same region.
    let e = enumerate_postprocessing(&TOY, TOY.uneven_exit_kernel());
    assert!((e - TOY.mean()).abs() > 1e-4, "E = {e}");
}

#[test]
fn empty_pools_leave_the_chain_alone() {
    let trace = ChainTrace::from_parts(vec![0usize, 2, 1, 2], vec![0, 1, 0, 1], 2).unwrap();
    let pools = RestrictedPool::<usize>::new(2);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let res = occlude(&trace, &pools, &mut rng).unwrap();
    assert!(res.indicators.iter().all(|s| !s));
    assert_eq!(res.occluded_states, trace.states());
    assert_eq!(res.occlusion_proportion, 0.0);
    let chain = trace.average(|&x| TOY.f[x]).unwrap();
    assert_eq!(occluded_estimate(|&x| TOY.f[x], &res).unwrap(), chain);
}

#[test]
fn full_pools_reproduce_the_ideal_estimator() {
    let trace = ChainTrace::from_parts(vec![0usize, 2, 1, 2, 0], vec![0, 1, 0, 1, 0], 2).unwrap();
    let pools = RestrictedPool::from_regions(vec![vec![1, 1, 0, 0], vec![2, 2, 2]]);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let res = occlude(&trace, &pools, &mut rng).unwrap();
    assert!(res.indicators.iter().all(|&s| s));
    assert_eq!(res.occlusion_proportion, 1.0);
    assert!((res.raw_pool_ratio - 7.0 / 5.0).abs() < 1e-15);
    let f = |&x: &usize| TOY.f[x];
    assert_eq!(
        occluded_estimate(f, &res).unwrap(),
        ideal_estimate(f, &trace, &pools).unwrap()
    );
}

#[test]
fn misplaced_pool_entry_is_a_consistency_error() {
    let trace = ChainTrace::from_parts(vec![0usize, 2], vec![0, 1], 2).unwrap();
    let pools = RestrictedPool::from_regions(vec![vec![2usize], vec![]]);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let err = occlude_checked(&trace, &pools, |&x| Ok(TOY.regions[x]), &mut rng);
    assert!(matches!(err, Err(occlusion_core::Error::Consistency(_))));
}

#[test]
fn occluded_subset_is_uniform() {
    // region 1 visited at times 2, 5, 9 (1-based), two pool samples
    let regions = vec![0, 1, 0, 0, 1, 0, 0, 0, 1, 0];
    let states: Vec<usize> = regions.clone();
    let trace = ChainTrace::from_parts(states, regions, 2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let reps = 100_000;
    let mut counts = [0usize; 3];
    for _ in 0..reps {
        let plan = plan_occlusion(&trace, &[0, 2], &mut rng).unwrap();
        let chosen = &plan.selected[1];
        assert_eq!(chosen.len(), 2);
        let idx = match chosen.as_slice() {
            [1, 4] => 0,
            [1, 8] => 1,
            [4, 8] => 2,
            other => panic!("unexpected subset {other:?}"),
        };
        counts[idx] += 1;
    }
    let expected = reps as f64 / 3.0;
    let chi2: f64 = counts
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum();
    // 0.999 quantile of chi-square with 2 degrees of freedom
    assert!(chi2 < 13.816, "chi2 = {chi2}, counts {counts:?}");
}

#[test]
fn occlusion_indicators_ignore_state_values() {
    let target = Tabulated::new(vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
    let mut kernel = DiscreteMetropolis::new(&target);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let n = 400;
    let mut states = Vec::with_capacity(n);
    let mut x = 0usize;
    for _ in 0..n {
        occlusion_core::MarkovKernel::step(&mut kernel, &mut x, &mut rng);
        states.push(x);
    }
    // a single region: every state is eligible
    let trace = ChainTrace::from_parts(states.clone(), vec![0; n], 1).unwrap();
    let f = |x: usize| (x as f64).powi(2);
    let (mut sx, mut sy, mut sxx, mut syy, mut sxy, mut m) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    for _ in 0..250 {
        let plan = plan_occlusion(&trace, &[n / 2], &mut rng).unwrap();
        let mut s = vec![0.0; n];
        for &t in &plan.selected[0] {
            s[t] = 1.0;
        }
        for t in 0..n {
            let (a, b) = (s[t], f(states[t]));
            sx += a;
            sy += b;
            sxx += a * a;
            syy += b * b;
            sxy += a * b;
            m += 1.0;
        }
    }
    let cov = sxy / m - sx / m * sy / m;
    let r = cov / ((sxx / m - (sx / m).powi(2)) * (syy / m - (sy / m).powi(2))).sqrt();
    assert!(r.abs() < 3.0 / m.sqrt(), "r = {r}");
}

#[test]
fn occluded_marginal_matches_target() {
    let target = Tabulated::new(vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
    let proposal = Tabulated::new(vec![1.0; 6]).unwrap();
    // RN = w(x): regions {1, 2, 3} and {4, 5, 6} by weight
    let partition = RegionPartition::new(&[3.5]).unwrap();
    let map = RegionMap::new(&target, &proposal, &partition);
    let probs = target.probabilities();
    let mut counts = [0usize; 6];
    let reps = 100;
    let len = 1000;
    for rep in 0..reps {
        let mut rng = seed_stream(1000 + rep, 7);
        let u: f64 = rng.random::<f64>() * 21.0;
        let initial = (0..6)
            .scan(0.0, |acc, x| {
                *acc += (x + 1) as f64;
                Some((x, *acc))
            })
            .find(|&(_, c)| u < c)
            .map_or(5, |(x, _)| x);
        let config = RunConfig {
            workers: 2,
            stop: StopCondition::FixedAttempts {
                chain_steps: len,
                attempts_per_worker: 300,
            },
            seed: 1000 + rep,
            deterministic: true,
        };
        let run = run_occlusion(
            DiscreteMetropolis::new(&target),
            initial,
            &map,
            |&x| x as f64,
            &config,
        )
        .unwrap();
        for &z in &run.result.occluded_states {
            counts[z] += 1;
        }
    }
    let total = (reps as usize * len) as f64;
    let tv: f64 = counts
        .iter()
        .zip(&probs)
        .map(|(&c, p)| (c as f64 / total - p).abs())
        .sum::<f64>()
        / 2.0;
    assert!(tv < 0.02, "TV = {tv}");
    let exact = exact_regions(&target, &proposal, &partition).unwrap();
    assert_eq!(exact.regions, vec![0, 0, 0, 1, 1, 1]);
}
