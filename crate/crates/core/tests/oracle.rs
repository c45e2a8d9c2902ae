//! Gaussian engine against the dense state-vector oracle.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use weakmeas_core::ed::{
    self, apply_kraus_ed, covariance_from_state, ee_ed, ground_state_ed, interval_entropy_ed,
    joint_born_distribution_x, joint_born_probability, outcomes_from_index, Axis, DenseState,
};
use weakmeas_core::linalg::tridiagonal_eigen;
use weakmeas_core::measurement::{
    apply_outcomes, apply_weak_x, born_probability_x, run_trajectory,
};
use weakmeas_core::{
    build_ground_state, CovarianceState, MeasurementScheme, Outcome, SpinInterval,
};

const TOL: f64 = 1e-8;

fn assert_same_gamma(g: &CovarianceState, d: &DenseState) {
    let dense = covariance_from_state(d);
    let diff = g.gamma().max_abs_diff(&dense);
    assert!(diff < TOL, "Γ mismatch {diff:e}");
}

fn compare_observables(g: &CovarianceState, d: &DenseState) {
    let l = g.l_spin();
    assert_same_gamma(g, d);
    for j in 1..=l {
        let gx = g.sigma_x(j).unwrap();
        assert!((gx - d.expectation(j, Axis::X).unwrap()).abs() < TOL);
    }
    for first in 1..=l {
        for last in first..=l {
            if first == 1 && last == l {
                continue;
            }
            let sg = g
                .entanglement_entropy(SpinInterval::new(first, last).unwrap())
                .unwrap();
            let sd = interval_entropy_ed(d, first, last).unwrap();
            assert!((sg - sd).abs() < TOL, "S[{first},{last}]: {sg} vs {sd}");
        }
    }
    for j in 1..=l {
        for jp in j + 1..=l {
            let xx = g.connected_xx(j, jp).unwrap();
            assert!((xx - d.connected(j, jp, Axis::X).unwrap()).abs() < TOL);
            let zz = d.two_point(j, jp, Axis::Z).unwrap().abs();
            let overlap = g.zz_correlator_abs(j, jp).unwrap();
            let string = g.zz_correlator_abs_string(j, jp).unwrap();
            assert!(
                (overlap.value - zz).abs() < TOL,
                "|zz|({j},{jp}) {} vs {zz}",
                overlap.value
            );
            assert!((string.value - zz).abs() < TOL);
        }
    }
}

#[test]
fn ground_state_energy_matches_mode_sum() {
    // E₀ = -Σ_k ε_k / 2 over the positive single-particle energies of the
    // Majorana hopping matrix with off-diagonal 2.
    let l = 8;
    let n = 2 * l;
    let eig = tridiagonal_eigen(&vec![0.0; n], &vec![2.0; n - 1], false).unwrap();
    let mode_sum: f64 = eig.values.iter().filter(|&&e| e > 0.0).sum();
    let ed = ground_state_ed(l).unwrap();
    assert!((ed.energy + 0.5 * mode_sum).abs() < 1e-10);
    assert!(ed.residual < 1e-10);
    assert!(ed.state.max_imag() == 0.0);
}

#[test]
fn lanczos_ground_state_is_converged() {
    let ed = ground_state_ed(12).unwrap();
    assert!(ed.residual <= 1e-10);
    let n = 24;
    let eig = tridiagonal_eigen(&vec![0.0; n], &vec![2.0; n - 1], false).unwrap();
    let mode_sum: f64 = eig.values.iter().filter(|&&e| e > 0.0).sum();
    assert!((ed.energy + 0.5 * mode_sum).abs() < 1e-9);
}

#[test]
fn ground_states_agree() {
    for l in 2..=10 {
        let g = build_ground_state::<f64>(l).unwrap();
        let d = ground_state_ed(l).unwrap().state;
        assert_same_gamma(&g, &d);
        if l >= 4 {
            let half = l / 2;
            let sg = g
                .entanglement_entropy(SpinInterval::prefix(half).unwrap())
                .unwrap();
            assert!((sg - ee_ed(&d, half).unwrap()).abs() < TOL);
        }
    }
    let d = ground_state_ed(10).unwrap().state;
    compare_observables(&build_ground_state(10).unwrap(), &d);
}

#[test]
fn mid_chain_sigma_x_approaches_two_over_pi() {
    let target = 2.0 / std::f64::consts::PI;
    let err = |l: usize| {
        let d = ground_state_ed(l).unwrap().state;
        (d.expectation(l / 2, Axis::X).unwrap() - target).abs()
    };
    let (e6, e10) = (err(6), err(10));
    assert!(e10 < e6);
    assert!(e10 < 0.05);
}

#[test]
fn single_measurement_update_matches_kraus() {
    let l = 8;
    let g = build_ground_state::<f64>(l).unwrap();
    let d = ground_state_ed(l).unwrap().state;
    let p_g = born_probability_x(&g, 3, 0.6, Outcome::Minus).unwrap();
    let (d2, p_d) = apply_kraus_ed(&d, 3, Axis::X, 0.6, Outcome::Minus).unwrap();
    assert!((p_g - p_d).abs() < 1e-10);
    let g2 = apply_weak_x(&g, 3, 0.6, Outcome::Minus).unwrap();
    compare_observables(&g2, &d2);
}

#[test]
fn random_trajectories_match_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for (l, lambda) in [(6, 0.3), (9, 0.75), (10, 0.5)] {
        let mut g = build_ground_state::<f64>(l).unwrap();
        let mut d = ground_state_ed(l).unwrap().state;
        let mut sites: Vec<usize> = (1..=l).collect();
        // Random site order exercises non-sequential updates.
        for i in (1..sites.len()).rev() {
            sites.swap(i, rng.gen_range(0..=i));
        }
        for &site in &sites {
            let o = if rng.gen::<bool>() {
                Outcome::Plus
            } else {
                Outcome::Minus
            };
            let p_g = born_probability_x(&g, site, lambda, o).unwrap();
            let (next, p_d) = apply_kraus_ed(&d, site, Axis::X, lambda, o).unwrap();
            assert!((p_g - p_d).abs() < 1e-10);
            g = apply_weak_x(&g, site, lambda, o).unwrap();
            d = next;
        }
        compare_observables(&g, &d);
    }
}

#[test]
fn uniform_post_selection_matches_oracle() {
    let l = 8;
    let ground = ground_state_ed(l).unwrap().state;
    for (scheme, o) in [
        (MeasurementScheme::UniformPlus, Outcome::Plus),
        (MeasurementScheme::UniformMinus, Outcome::Minus),
    ] {
        let (_, g) =
            run_trajectory(&build_ground_state::<f64>(l).unwrap(), 0.4, scheme, 0).unwrap();
        let d = ed::post_select_uniform(&ground, Axis::X, 0.4, o).unwrap();
        compare_observables(&g, &d);
    }
}

#[test]
fn sequential_probabilities_equal_joint_distribution() {
    let l = 8;
    let lambda = 0.55;
    let ground = build_ground_state::<f64>(l).unwrap();
    let d = ground_state_ed(l).unwrap().state;
    let dist = joint_born_distribution_x(&d, lambda).unwrap();
    assert!((dist.iter().sum::<f64>() - 1.0).abs() < 1e-10);
    for (idx, &p_joint) in dist.iter().enumerate() {
        let outcomes = outcomes_from_index(idx, l);
        let seq: Vec<(usize, Outcome)> = outcomes
            .iter()
            .enumerate()
            .map(|(k, &o)| (k + 1, o))
            .collect();
        let mut g = ground.clone();
        let log_p = apply_outcomes(&mut g, lambda, &seq).unwrap();
        assert!((log_p.exp() - p_joint).abs() < 1e-10, "string {idx}");
        if idx % 37 == 0 {
            let direct = joint_born_probability(&d, Axis::X, lambda, &outcomes).unwrap();
            assert!((direct - p_joint).abs() < 1e-12);
        }
    }
}

#[test]
fn sampled_outcomes_follow_joint_born_distribution() {
    let l = 8;
    let lambda = 0.5;
    let ground = build_ground_state::<f64>(l).unwrap();
    let d = ground_state_ed(l).unwrap().state;
    let dist = joint_born_distribution_x(&d, lambda).unwrap();
    // The plug-in distance over 256 strings has a sampling floor of about
    // 0.015 at 1e5 draws; 4e5 draws bring it to about 0.0075.
    let n = 400_000;
    let mut counts = vec![0usize; 1 << l];
    for k in 0..n {
        let (rec, _) = run_trajectory(&ground, lambda, MeasurementScheme::Born, k).unwrap();
        let idx = rec
            .outcomes
            .iter()
            .enumerate()
            .fold(0usize, |acc, (b, &o)| {
                acc | (usize::from(o == Outcome::Minus) << b)
            });
        counts[idx] += 1;
    }
    let tv: f64 = 0.5
        * counts
            .iter()
            .zip(&dist)
            .map(|(&c, &p)| (c as f64 / n as f64 - p).abs())
            .sum::<f64>();
    assert!(tv <= 0.01, "total variation {tv}");
}

#[test]
fn z_states_are_related_by_global_flip() {
    for lambda in [0.1, 0.4, 0.8] {
        let g = ground_state_ed(8).unwrap().state;
        let plus = ed::post_select_uniform(&g, Axis::Z, lambda, Outcome::Plus).unwrap();
        let minus = ed::post_select_uniform(&g, Axis::Z, lambda, Outcome::Minus).unwrap();
        assert!((minus.fidelity(&plus.global_flip()).unwrap() - 1.0).abs() < 1e-10);
        let direct = ed::uniform_z_state(8, lambda).unwrap();
        assert!((direct.fidelity(&plus).unwrap() - 1.0).abs() < 1e-10);
        assert_eq!(direct.max_imag(), 0.0);
    }
}
