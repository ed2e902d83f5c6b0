use dichotomy_core::exponent::{
    conjugate_order, f_flat_alpha_form, f_minimax_delta_form, first_order_rate,
    minimax_objective, purified_lower_bound, purified_objective, sc_exponent_purified,
    sc_exponent_trace_pure, Dichotomy, Rate,
};
use dichotomy_core::operator::{
    random_density, random_density_with, random_pure_with, seeded_rng, DensityOperator,
};
use proptest::prelude::*;

/// Classical Rényi divergence in bits, written out directly.
fn classical_renyi(alpha: f64, p: &[f64], q: &[f64]) -> f64 {
    if alpha == f64::INFINITY {
        return p
            .iter()
            .zip(q)
            .filter(|(pi, _)| **pi > 0.0)
            .map(|(pi, qi)| (pi / qi).log2())
            .fold(f64::NEG_INFINITY, f64::max);
    }
    let s: f64 = p
        .iter()
        .zip(q)
        .filter(|(pi, _)| **pi > 0.0)
        .map(|(pi, qi)| pi.powf(alpha) * qi.powf(1.0 - alpha))
        .sum();
    s.log2() / (alpha - 1.0)
}

fn classical_scan(p1: &[f64], q1: &[f64], p2: &[f64], q2: &[f64], r: f64, points: usize) -> f64 {
    let mut best: f64 = 0.0;
    for i in 0..points {
        let alpha = 0.5 + 0.5 * i as f64 / points as f64;
        let beta = if i == 0 { f64::INFINITY } else { alpha / (2.0 * alpha - 1.0) };
        let v = (1.0 - alpha) / alpha
            * (r * classical_renyi(alpha, p2, q2) - classical_renyi(beta, p1, q1));
        best = best.max(v);
    }
    best
}

#[test]
fn purified_exponent_matches_dense_scalar_scan() {
    let (p, q) = ([0.9, 0.1], [0.5, 0.5]);
    let d = Dichotomy::classical(&p, &q).unwrap();
    let e = sc_exponent_purified(&d, &d, 2.0).unwrap();
    let oracle = classical_scan(&p, &q, &p, &q, 2.0, 1_000_000);
    assert!((e.value - oracle).abs() < 1e-6, "{} vs {}", e.value, oracle);
    // frozen from the dense scan
    assert!((oracle - 0.078087855424808).abs() < 1e-9, "{oracle}");
    assert!(e.argmax_order > 0.5 && e.argmax_order < 1.0);
}

#[test]
fn rate_of_identical_classical_pair() {
    let d = Dichotomy::classical(&[0.9, 0.1], &[0.5, 0.5]).unwrap();
    assert_eq!(first_order_rate(&d, &d), Rate::Finite(1.0));
    let e = sc_exponent_purified(&d, &d, 2.0).unwrap();
    assert_eq!(e.rate_threshold, Rate::Finite(1.0));
}

#[test]
fn trace_pure_equals_purified_for_qubit_example() {
    let d1 = Dichotomy::new(
        DensityOperator::basis_state(2, 0).unwrap(),
        DensityOperator::maximally_mixed(2),
    )
    .unwrap();
    let d2 = d1.clone();
    let t = sc_exponent_trace_pure(&d1, &d2, 2.0).unwrap();
    let p = sc_exponent_purified(&d1, &d2, 2.0).unwrap();
    assert!((t.value - p.value).abs() < 1e-8);
}

#[test]
fn trace_pure_equals_purified_on_random_pure_targets() {
    let mut rng = seeded_rng(2024);
    for _ in 0..10 {
        let d1 = Dichotomy::new(
            random_density_with(3, 3, &mut rng).unwrap(),
            random_density_with(3, 3, &mut rng).unwrap(),
        )
        .unwrap();
        let d2 = Dichotomy::new(
            random_pure_with(2, &mut rng).unwrap(),
            random_density_with(2, 2, &mut rng).unwrap(),
        )
        .unwrap();
        let t = sc_exponent_trace_pure(&d1, &d2, 1.3).unwrap();
        assert!(t.cross_check_gap.unwrap() < 1e-8);
    }
}

#[test]
fn lower_bound_curve_is_the_theorem_curve() {
    let d1 = Dichotomy::new(random_density(3, 3, 1).unwrap(), random_density(3, 3, 2).unwrap()).unwrap();
    let d2 = Dichotomy::new(random_density(2, 2, 3).unwrap(), random_density(2, 2, 4).unwrap()).unwrap();
    let a = sc_exponent_purified(&d1, &d2, 2.5).unwrap();
    let b = purified_lower_bound(&d1, &d2, 2.5).unwrap();
    for i in 0..50 {
        let (alpha, v) = b.curve[i * 10];
        assert_eq!(v.to_bits(), a.curve[i * 10].1.to_bits());
        assert_eq!(v.to_bits(), purified_objective(alpha, &d1, &d2, 2.5).to_bits());
    }
    assert_eq!(a.value.to_bits(), b.value.to_bits());
}

#[test]
fn flat_bound_dominates_on_random_instances() {
    let mut rng = seeded_rng(7);
    for _ in 0..15 {
        let d1 = Dichotomy::new(
            random_density_with(3, 3, &mut rng).unwrap(),
            random_density_with(3, 3, &mut rng).unwrap(),
        )
        .unwrap();
        let d2 = Dichotomy::new(
            random_density_with(3, 2, &mut rng).unwrap(),
            random_density_with(3, 3, &mut rng).unwrap(),
        )
        .unwrap();
        let r = 0.5 + 2.5 * rand::Rng::random::<f64>(&mut rng);
        let p = sc_exponent_purified(&d1, &d2, r).unwrap();
        let f = f_flat_alpha_form(&d1, &d2, r).unwrap();
        assert!(f.value >= p.value - 1e-6, "{} < {}", f.value, p.value);
    }
}

#[test]
fn flat_bound_collapses_on_commuting_instances() {
    let d1 = Dichotomy::classical(&[0.6, 0.3, 0.1], &[0.2, 0.3, 0.5]).unwrap();
    let d2 = Dichotomy::classical(&[0.7, 0.3], &[0.4, 0.6]).unwrap();
    for r in [0.5, 1.0, 2.0, 4.0] {
        let p = sc_exponent_purified(&d1, &d2, r).unwrap();
        let f = f_flat_alpha_form(&d1, &d2, r).unwrap();
        let m = f_minimax_delta_form(&d1, &d2, r).unwrap();
        assert!((p.value - f.value).abs() < 1e-6);
        assert!((m.exponent.value - f.value).abs() < 1e-6);
    }
}

#[test]
fn random_probes_never_beat_gibbs_optimizers() {
    let mut rng = seeded_rng(99);
    let d1 = Dichotomy::new(random_density(3, 3, 61).unwrap(), random_density(3, 3, 62).unwrap()).unwrap();
    let d2 = Dichotomy::new(random_density(3, 3, 63).unwrap(), random_density(3, 3, 64).unwrap()).unwrap();
    let r = 1.7 + 2.0 * first_order_rate(&d1, &d2).as_f64();
    let m = f_minimax_delta_form(&d1, &d2, r).unwrap();
    let delta = m.exponent.argmax_order;
    assert!(delta > 0.0);
    let infimum = m.exponent.value;
    for _ in 0..100 {
        let t1 = random_density_with(3, 3, &mut rng).unwrap();
        let t2 = random_density_with(3, 3, &mut rng).unwrap();
        let v = minimax_objective(&d1, &d2, r, delta, &t1, &t2).unwrap();
        assert!(v >= infimum - 1e-8, "{v} < {infimum}");
    }
    // perturbing the optimizers only increases the objective
    let t2 = m.tau2.clone().unwrap();
    for eps in [1e-3, 1e-2, 1e-1] {
        let mix = m
            .tau1
            .scale(1.0 - eps)
            .add(&DensityOperator::maximally_mixed(3).scale(eps))
            .unwrap();
        let mix = DensityOperator::new(mix).unwrap();
        let v = minimax_objective(&d1, &d2, r, delta, &mix, &t2).unwrap();
        assert!(v >= infimum - 1e-8);
    }
}

#[test]
fn conjugate_order_pairs() {
    assert_eq!(conjugate_order(0.5), f64::INFINITY);
    assert_eq!(conjugate_order(1.0), 1.0);
    assert!((1.0 / 0.75 + 1.0 / conjugate_order(0.75) - 2.0).abs() < 1e-15);
}

fn prob_vector(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.05f64..1.0, n).prop_map(|v| {
        let s: f64 = v.iter().sum();
        v.into_iter().map(|x| x / s).collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn zero_below_rate(p1 in prob_vector(3), q1 in prob_vector(3), p2 in prob_vector(2), q2 in prob_vector(2), frac in 0.05f64..1.0) {
        let d1 = Dichotomy::classical(&p1, &q1).unwrap();
        let d2 = Dichotomy::classical(&p2, &q2).unwrap();
        if let Rate::Finite(rate) = first_order_rate(&d1, &d2) {
            prop_assume!(rate > 1e-6);
            let e = sc_exponent_purified(&d1, &d2, frac * rate).unwrap();
            prop_assert!(e.value.abs() < 1e-9, "value {}", e.value);
        }
    }

    #[test]
    fn nondecreasing_in_rate(seed in 0u64..10_000) {
        let d1 = Dichotomy::new(random_density(2, 2, seed).unwrap(), random_density(2, 2, seed + 1).unwrap()).unwrap();
        let d2 = Dichotomy::new(random_density(2, 2, seed + 2).unwrap(), random_density(2, 2, seed + 3).unwrap()).unwrap();
        let mut last = 0.0;
        for k in 1..=8 {
            let v = sc_exponent_purified(&d1, &d2, 0.5 * k as f64).unwrap().value;
            prop_assert!(v >= last - 1e-9);
            prop_assert!(v >= 0.0);
            last = v;
        }
    }

    #[test]
    fn minimax_agrees_with_alpha_form(seed in 0u64..10_000, r in 0.3f64..3.0) {
        let d1 = Dichotomy::new(random_density(2, 2, seed).unwrap(), random_density(2, 2, seed + 1).unwrap()).unwrap();
        let d2 = Dichotomy::new(random_density(2, 2, seed + 2).unwrap(), random_density(2, 2, seed + 3).unwrap()).unwrap();
        let a = f_flat_alpha_form(&d1, &d2, r).unwrap();
        let m = f_minimax_delta_form(&d1, &d2, r).unwrap();
        prop_assert!((a.value - m.exponent.value).abs() < 1e-6);
        prop_assert!((m.objective_at_optimizers - m.exponent.value).abs() < 1e-8);
    }
}
