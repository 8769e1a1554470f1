use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use walkpovm::coin::{inner, phase_invariant_distance, trace_distance};
use walkpovm::exec::trial_rng;
use walkpovm::experiment::{distance_trials, l1_distance, sample_counts, Distribution1D};
use walkpovm::povm::povm_elements;
use walkpovm::tomography::{forward_probs, mle_reconstruct, MLE_MAX_ITER, MLE_TOL};
use walkpovm::waveplate::{apply_sequence, compile_coin, solve_preparation};
use walkpovm::{
    evolve, initial_state, position_distribution, CoinVector, Execution, SubStep, WalkSchedule, C64,
};
use walkpovm::{random, reference, schedule_io};

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

fn random_schedule(rng: &mut ChaCha8Rng) -> WalkSchedule {
    let steps = rng.random_range(1..=4);
    let steps = (0..steps)
        .map(|_| {
            let layers = rng.random_range(1..=2);
            (0..layers)
                .map(|_| {
                    let sites = rng.random_range(0..=4);
                    let pairs: Vec<_> = (0..sites)
                        .map(|_| (rng.random_range(-4..=4), random::haar_unitary(rng)))
                        .collect();
                    SubStep::from_pairs(pairs).unwrap()
                })
                .collect()
        })
        .collect();
    WalkSchedule::new(rng.random_range(-2..=2), steps).unwrap()
}

fn random_distribution(rng: &mut ChaCha8Rng, sites: usize) -> Distribution1D {
    let w: Vec<f64> = (0..sites).map(|_| rng.random::<f64>() + 1e-3).collect();
    let s: f64 = w.iter().sum();
    w.iter()
        .enumerate()
        .map(|(x, p)| (x as i64, p / s))
        .collect()
}

proptest! {
    #![proptest_config(config(200))]

    #[test]
    fn evolution_preserves_norm(seed in any::<u64>()) {
        let mut rng = trial_rng(seed, 0);
        let s = random_schedule(&mut rng);
        let out = evolve(&s.initial(random::pure_state(&mut rng)), &s);
        prop_assert!((out.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn evolution_is_linear(seed in any::<u64>()) {
        let mut rng = trial_rng(seed, 0);
        let s = random_schedule(&mut rng);
        let a = C64::new(rng.random(), rng.random());
        let b = C64::new(rng.random(), rng.random());
        let psi = s.initial(random::pure_state(&mut rng));
        let phi = s.initial(random::pure_state(&mut rng));
        let lhs = evolve(&psi.scale(a).add(&phi.scale(b)), &s);
        let rhs = evolve(&psi, &s).scale(a).add(&evolve(&phi, &s).scale(b));
        prop_assert!(lhs.max_abs_diff(&rhs) < 1e-12);
    }

    #[test]
    fn support_keeps_shift_parity(seed in any::<u64>()) {
        let mut rng = trial_rng(seed, 0);
        let s = random_schedule(&mut rng);
        let out = evolve(&s.initial(random::pure_state(&mut rng)), &s);
        let parity = (s.origin() + s.shift_count() as i64).rem_euclid(2);
        prop_assert!(out.support().all(|x| x.rem_euclid(2) == parity));
    }

    #[test]
    fn povm_of_random_schedule_is_complete_and_born(seed in any::<u64>()) {
        let mut rng = trial_rng(seed, 0);
        let s = random_schedule(&mut rng);
        let povm = povm_elements(&s).unwrap();
        prop_assert!(povm.completeness_residual() < 1e-12);
        let psi = random::pure_state(&mut rng);
        let born = forward_probs(&psi.projector(), &povm).unwrap();
        let walk = position_distribution(&evolve(&s.initial(psi), &s)).unwrap();
        for x in born.keys().chain(walk.keys()) {
            let d = born.get(x).unwrap_or(&0.0) - walk.get(x).unwrap_or(&0.0);
            prop_assert!(d.abs() < 1e-12);
        }
    }

    #[test]
    fn schedule_json_round_trips(seed in any::<u64>()) {
        let mut rng = trial_rng(seed, 0);
        let s = random_schedule(&mut rng);
        let text = schedule_io::to_json_string(&s);
        let back = schedule_io::from_json_str(&text).unwrap();
        prop_assert_eq!(&back, &s);
        prop_assert_eq!(schedule_io::to_json_string(&back), text);
    }

    #[test]
    fn compile_round_trip(seed in any::<u64>()) {
        let u = random::haar_unitary(&mut trial_rng(seed, 1));
        let plates = compile_coin(&u).unwrap();
        prop_assert!(plates.len() <= 3);
        prop_assert!(phase_invariant_distance(&apply_sequence(&plates), &u) < 1e-8);
    }

    #[test]
    fn preparation_round_trip(seed in any::<u64>()) {
        let target = random::pure_state(&mut trial_rng(seed, 2));
        let plates = solve_preparation(&target).unwrap();
        prop_assert!(plates.len() <= 2);
        let out = apply_sequence(&plates).apply(&CoinVector::horizontal());
        prop_assert!(inner(&target, &out).norm() >= 1.0 - 1e-9);
    }

    #[test]
    fn l1_is_a_metric(seed in any::<u64>()) {
        let mut rng = trial_rng(seed, 3);
        let [p, q, r] = [(); 3].map(|_| random_distribution(&mut rng, 5));
        let pq = l1_distance(&p, &q).unwrap();
        prop_assert_eq!(pq, l1_distance(&q, &p).unwrap());
        prop_assert_eq!(l1_distance(&p, &p).unwrap(), 0.0);
        prop_assert!((0.0..=1.0).contains(&pq));
        prop_assert!(pq <= l1_distance(&p, &r).unwrap() + l1_distance(&r, &q).unwrap() + 1e-15);
    }
}

proptest! {
    #![proptest_config(config(20))]

    #[test]
    fn sampling_is_unbiased(seed in any::<u64>()) {
        let mut rng = trial_rng(seed, 4);
        let p = random_distribution(&mut rng, 4);
        let n = 20_000u64;
        let runs = 50;
        let mut mean: BTreeMap<i64, f64> = BTreeMap::new();
        for k in 0..runs {
            let rec = sample_counts(&p, n, seed.wrapping_add(k)).unwrap();
            prop_assert_eq!(rec.counts.values().sum::<u64>(), n);
            for (x, f) in rec.frequencies() {
                *mean.entry(x).or_default() += f / runs as f64;
            }
        }
        for (x, px) in &p {
            let sigma = (px * (1.0 - px) / (n * runs) as f64).sqrt();
            prop_assert!((mean[x] - px).abs() < 5.0 * sigma, "x={} {} vs {}", x, mean[x], px);
        }
    }
}

fn mean_mle_error(n: u64, trials: u64) -> f64 {
    let povm = povm_elements(&reference::schedule()).unwrap();
    let total: f64 = (0..trials)
        .map(|t| {
            let rho = random::pure_state(&mut trial_rng(99, t)).projector();
            let p = forward_probs(&rho, &povm).unwrap();
            let p: Distribution1D = p.into_iter().map(|(x, v)| (x, v.max(0.0))).collect();
            let rec = sample_counts(&walkpovm::experiment::renormalized(&p), n, 1000 + t).unwrap();
            let est = mle_reconstruct(&rec, &povm, MLE_TOL, MLE_MAX_ITER).unwrap();
            trace_distance(&est.rho, &rho)
        })
        .sum();
    total / trials as f64
}

#[test]
fn mle_error_scales_as_inverse_sqrt_n() {
    let coarse = mean_mle_error(1_000, 60);
    let fine = mean_mle_error(64_000, 60);
    // √64 = 8
    let ratio = coarse / fine;
    assert!((4.0..16.0).contains(&ratio), "{coarse} / {fine} = {ratio}");
}

#[test]
fn execution_modes_agree() {
    let s = reference::schedule();
    let psi = initial_state(3).unwrap();
    let a = distance_trials(&s, &psi, 0.992, 0.2, 10..74, 32_000, Execution::Sequential).unwrap();
    let b = distance_trials(&s, &psi, 0.992, 0.2, 10..74, 32_000, Execution::Parallel).unwrap();
    assert_eq!(a, b);
}

#[test]
fn visibility_one_matches_theory_for_every_state() {
    let s = reference::schedule();
    for i in 1..=4 {
        let psi = initial_state(i).unwrap();
        let ideal = position_distribution(&evolve(&s.initial(psi), &s)).unwrap();
        let d = distance_trials(&s, &psi, 1.0, 0.0, 0..8, 32_000, Execution::default()).unwrap();
        // only shot noise remains
        assert!(d.iter().all(|&v| v < 0.03), "{d:?}");
        assert_eq!(ideal.len(), 3);
    }
}
