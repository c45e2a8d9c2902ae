//! Property tests for measurement, closed-form curves and statistics.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use weakmeas_core::analytics::{
    c_eff_biased_prediction, c_eff_uniform, optimal_bias, replica_g_tilde, ReplicaParams,
};
use weakmeas_core::measurement::{apply_outcomes, apply_weak_x, born_probability_x};
use weakmeas_core::stats::mean_and_stderr;
use weakmeas_core::{build_ground_state, Outcome, SpinInterval};

const L: usize = 10;

fn outcome(bit: bool) -> Outcome {
    if bit {
        Outcome::Plus
    } else {
        Outcome::Minus
    }
}

fn max_abs_diff(a: &weakmeas_core::CovarianceState, b: &weakmeas_core::CovarianceState) -> f64 {
    let n = a.n_majorana();
    let mut worst: f64 = 0.0;
    for r in 0..n {
        for c in 0..n {
            worst = worst.max((a.gamma()[(r, c)] - b.gamma()[(r, c)]).abs());
        }
    }
    worst
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn measurement_order_does_not_matter(
        lambda in 0.05f64..0.9,
        bits in proptest::collection::vec(any::<bool>(), L),
        order in Just((1..=L).collect::<Vec<_>>()).prop_shuffle(),
    ) {
        let ground = build_ground_state::<f64>(L).unwrap();
        let forward: Vec<_> = (1..=L).map(|s| (s, outcome(bits[s - 1]))).collect();
        let shuffled: Vec<_> = order.iter().map(|&s| (s, outcome(bits[s - 1]))).collect();
        let mut a = ground.clone();
        let mut b = ground;
        let wa = apply_outcomes(&mut a, lambda, &forward).unwrap();
        let wb = apply_outcomes(&mut b, lambda, &shuffled).unwrap();
        prop_assert!(max_abs_diff(&a, &b) <= 1e-10);
        prop_assert!((wa - wb).abs() <= 1e-10);
    }

    #[test]
    fn probabilities_sum_to_one_and_purity_holds(
        lambda in 0.0f64..=1.0,
        bits in proptest::collection::vec(any::<bool>(), L),
        probe in 1usize..=L,
    ) {
        let mut state = build_ground_state::<f64>(L).unwrap();
        for (i, &bit) in bits.iter().enumerate().take(L / 2) {
            let next = apply_weak_x(&state, i + 1, lambda.min(0.95), outcome(bit)).unwrap();
            state = next;
        }
        let p = born_probability_x(&state, probe, lambda, Outcome::Plus).unwrap()
            + born_probability_x(&state, probe, lambda, Outcome::Minus).unwrap();
        prop_assert!((p - 1.0).abs() <= 1e-14);
        prop_assert!(state.purity_error() <= 1e-10);
    }

    #[test]
    fn pure_state_entropy_is_symmetric(
        lambda in 0.0f64..0.95,
        bits in proptest::collection::vec(any::<bool>(), L),
        cut in 1usize..L,
    ) {
        let mut state = build_ground_state::<f64>(L).unwrap();
        let outcomes: Vec<_> = (1..=L).map(|s| (s, outcome(bits[s - 1]))).collect();
        apply_outcomes(&mut state, lambda, &outcomes).unwrap();
        let left = state.entanglement_entropy(SpinInterval::new(1, cut).unwrap()).unwrap();
        let right = state.entanglement_entropy(SpinInterval::new(cut + 1, L).unwrap()).unwrap();
        prop_assert!((left - right).abs() <= 1e-10);
    }

    #[test]
    fn uniform_curve_is_bounded_and_decreasing(a in 0.0f64..1.0, b in 0.0f64..1.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let c_lo = c_eff_uniform(lo).unwrap();
        let c_hi = c_eff_uniform(hi).unwrap();
        prop_assert!((0.0..=0.5 + 1e-12).contains(&c_lo));
        prop_assert!(c_hi <= c_lo + 1e-12);
    }

    #[test]
    fn optimal_bias_restores_half(lambda in 0.01f64..0.99) {
        let p = optimal_bias(lambda).unwrap();
        prop_assert!((0.5..=1.0).contains(&p));
        prop_assert!((c_eff_biased_prediction(lambda, p).unwrap() - 0.5).abs() <= 1e-12);
    }

    #[test]
    fn single_replica_coupling_vanishes(lambda in 0.0f64..1.0) {
        let params = ReplicaParams::new(lambda, 1.0).unwrap();
        prop_assert!(replica_g_tilde(&params).unwrap().abs() <= 1e-12);
    }
}

#[test]
fn stderr_shrinks_as_inverse_root_n() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut average = |n: usize| {
        let reps = 400;
        (0..reps)
            .map(|_| {
                let xs: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
                mean_and_stderr(&xs).1
            })
            .sum::<f64>()
            / reps as f64
    };
    let s25 = average(25);
    let s100 = average(100);
    let s400 = average(400);
    for (ratio, name) in [(s25 / s100, "25/100"), (s100 / s400, "100/400")] {
        assert!((ratio - 2.0).abs() <= 0.4, "stderr ratio {name} = {ratio}");
    }
    // Uniform variance is 1/12.
    let expected = (1.0f64 / 12.0 / 400.0).sqrt();
    assert!((s400 - expected).abs() <= 0.2 * expected);
}
