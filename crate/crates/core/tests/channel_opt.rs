use dichotomy_core::channel_opt::{
    classical_optimal_fidelity, classical_reduce, eps_at_rate, eps_for_counts, max_transform_count,
    solve_optimal_fidelity, solve_optimal_trace, transform_count_limit, DistanceKind,
    FiniteBlockResult, PathChoice, SolverPath,
};
use dichotomy_core::divergence::{fidelity, trace_distance};
use dichotomy_core::exponent::Dichotomy;
use dichotomy_core::operator::{
    random_density, random_density_with, random_pure_with, seeded_rng, DensityOperator,
    HermitianOperator,
};
use nalgebra::DMatrix;
use num_complex::Complex64;

const TOL: f64 = 1e-7;

fn assert_valid_channel(res: &FiniteBlockResult, sigma_in: &DensityOperator, sigma_t: &DensityOperator) {
    let ch = res.channel.as_ref().expect("channel");
    assert!(ch.tp_residual() <= 1e-7, "tp {}", ch.tp_residual());
    assert!(ch.min_choi_eigenvalue() >= -1e-8);
    let out = ch.apply(sigma_in).unwrap();
    let diff = out.sub(sigma_t).unwrap();
    assert!(diff.trace_norm() <= 1e-7, "sigma {}", diff.trace_norm());
    assert!(res.sigma_residual <= 1e-7);
}

/// Best fidelity over 2×2 column-stochastic `T = [[a, b], [1−a, 1−b]]` with
/// `T s1 = s2`. The constraint fixes `b` given `a`; scan `a` densely, then
/// polish the best cell by golden section.
fn stochastic_grid_oracle(p1: [f64; 2], s1: [f64; 2], p2: [f64; 2], s2: [f64; 2]) -> f64 {
    let value = |a: f64| -> Option<f64> {
        let b = (s2[0] - a * s1[0]) / s1[1];
        if !(-1e-15..=1.0 + 1e-15).contains(&b) {
            return None;
        }
        let b = b.clamp(0.0, 1.0);
        let o0 = a * p1[0] + b * p1[1];
        let o1 = (1.0 - a) * p1[0] + (1.0 - b) * p1[1];
        Some((o0.max(0.0) * p2[0]).sqrt() + (o1.max(0.0) * p2[1]).sqrt())
    };
    let points = 1_000_000;
    let (mut best, mut best_a) = (f64::NEG_INFINITY, 0.0);
    for i in 0..=points {
        let a = i as f64 / points as f64;
        if let Some(v) = value(a) {
            if v > best {
                best = v;
                best_a = a;
            }
        }
    }
    let h = 1.0 / points as f64;
    let (mut lo, mut hi) = ((best_a - h).max(0.0), (best_a + h).min(1.0));
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..100 {
        let x1 = hi - g * (hi - lo);
        let x2 = lo + g * (hi - lo);
        let f1 = value(x1).unwrap_or(f64::NEG_INFINITY);
        let f2 = value(x2).unwrap_or(f64::NEG_INFINITY);
        if f1 >= f2 {
            hi = x2;
        } else {
            lo = x1;
        }
    }
    best.max(value(0.5 * (lo + hi)).unwrap_or(f64::NEG_INFINITY))
}

#[test]
fn identical_dichotomy_is_transformed_perfectly() {
    let rho = random_density(3, 3, 11).unwrap();
    let sigma = random_density(3, 3, 12).unwrap();
    let res = solve_optimal_fidelity(&rho, &sigma, &rho, &sigma, TOL).unwrap();
    assert!((res.optimal_fidelity_sq - 1.0).abs() < 1e-7, "{}", res.optimal_fidelity_sq);
    assert!(res.optimal_error < 1e-3);
    assert_valid_channel(&res, &sigma, &sigma);
    let t = solve_optimal_trace(&rho, &sigma, &rho, &sigma, TOL).unwrap();
    assert!(t.optimal_error < 1e-7);
    assert_valid_channel(&t, &sigma, &sigma);
}

#[test]
fn replacement_channel_bounds_hold() {
    let mut rng = seeded_rng(5);
    for _ in 0..6 {
        let rho_in = random_density_with(2, 2, &mut rng).unwrap();
        let sigma_in = random_density_with(2, 2, &mut rng).unwrap();
        let rho_t = random_density_with(3, 2, &mut rng).unwrap();
        let sigma_t = random_density_with(3, 3, &mut rng).unwrap();
        let f = solve_optimal_fidelity(&rho_in, &sigma_in, &rho_t, &sigma_t, TOL).unwrap();
        let floor = fidelity(&sigma_t, &rho_t).unwrap();
        assert!(f.optimal_fidelity_sq >= floor * floor - 1e-7);
        assert!(f.solver_gap <= TOL * 10.0);
        assert!(((1.0 - f.optimal_fidelity_sq).sqrt() - f.optimal_error).abs() < 1e-7);
        assert_valid_channel(&f, &sigma_in, &sigma_t);
        let d = solve_optimal_trace(&rho_in, &sigma_in, &rho_t, &sigma_t, TOL).unwrap();
        assert!(d.optimal_error <= trace_distance(&sigma_t, &rho_t).unwrap() + 1e-7);
        assert_valid_channel(&d, &sigma_in, &sigma_t);
    }
}

#[test]
fn classical_qubit_optimum_matches_stochastic_grid() {
    let cases = [
        ([0.9, 0.1], [0.5, 0.5], [0.7, 0.3], [0.4, 0.6]),
        ([0.6, 0.4], [0.2, 0.8], [0.95, 0.05], [0.5, 0.5]),
        ([0.3, 0.7], [0.6, 0.4], [0.1, 0.9], [0.5, 0.5]),
    ];
    for (p1, s1, p2, s2) in cases {
        let oracle = stochastic_grid_oracle(p1, s1, p2, s2);
        let sdp = solve_optimal_fidelity(
            &DensityOperator::diagonal(&p1).unwrap(),
            &DensityOperator::diagonal(&s1).unwrap(),
            &DensityOperator::diagonal(&p2).unwrap(),
            &DensityOperator::diagonal(&s2).unwrap(),
            TOL,
        )
        .unwrap();
        let f = sdp.optimal_fidelity_sq.sqrt();
        assert!((f - oracle).abs() < 1e-5, "sdp {f} vs grid {oracle}");
        let d1 = Dichotomy::classical(&p1, &s1).unwrap();
        let d2 = Dichotomy::classical(&p2, &s2).unwrap();
        let red = classical_reduce(&d1, &d2).unwrap();
        let fast = classical_optimal_fidelity(&red.instance, TOL).unwrap();
        assert!((fast.value - oracle).abs() < 1e-5, "fast {} vs grid {oracle}", fast.value);
        assert!((fast.achieved_fidelity(&red.instance) - fast.value).abs() < 1e-6);
    }
}

#[test]
fn pure_target_trace_and_purified_errors_are_chained() {
    let mut rng = seeded_rng(31);
    for _ in 0..5 {
        let rho_in = random_density_with(2, 2, &mut rng).unwrap();
        let sigma_in = random_density_with(2, 2, &mut rng).unwrap();
        let rho_t = random_pure_with(2, &mut rng).unwrap();
        let sigma_t = random_density_with(2, 2, &mut rng).unwrap();
        let d = solve_optimal_trace(&rho_in, &sigma_in, &rho_t, &sigma_t, TOL).unwrap().optimal_error;
        let p = solve_optimal_fidelity(&rho_in, &sigma_in, &rho_t, &sigma_t, TOL).unwrap().optimal_error;
        assert!(d <= p + 1e-6, "d {d} > P {p}");
        assert!(p <= d.sqrt() + 1e-6, "P {p} > sqrt d {}", d.sqrt());
    }
}

#[test]
fn reduction_detects_commuting_instances() {
    let d1 = Dichotomy::classical(&[0.8, 0.2], &[0.3, 0.7]).unwrap();
    let d2 = Dichotomy::classical(&[0.6, 0.4], &[0.5, 0.5]).unwrap();
    assert!(classical_reduce(&d1, &d2).is_some());
    let x = HermitianOperator::new(nalgebra::DMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::new(0.5, 0.0),
            Complex64::new(0.3, 0.0),
            Complex64::new(0.3, 0.0),
            Complex64::new(0.5, 0.0),
        ],
    ))
    .unwrap();
    let noncommuting =
        Dichotomy::new(DensityOperator::new(x).unwrap(), DensityOperator::diagonal(&[0.7, 0.3]).unwrap()).unwrap();
    assert!(classical_reduce(&noncommuting, &d2).is_none());
}

#[test]
fn fast_path_matches_general_solver() {
    let d1 = Dichotomy::classical(&[0.8, 0.2], &[0.3, 0.7]).unwrap();
    let d2 = Dichotomy::classical(&[0.6, 0.4], &[0.5, 0.5]).unwrap();
    for (n, m) in [(1, 1), (2, 1), (2, 2), (2, 3)] {
        for kind in [DistanceKind::Purified, DistanceKind::Trace] {
            let fast = eps_for_counts(&d1, &d2, n, m, kind, TOL, PathChoice::Auto).unwrap();
            let full = eps_for_counts(&d1, &d2, n, m, kind, TOL, PathChoice::General).unwrap();
            assert_eq!(fast.path, SolverPath::Classical);
            assert_eq!(full.path, SolverPath::General);
            // purified errors near zero are √ of the F² gap, so compare F² there
            let (a, b) = match kind {
                DistanceKind::Purified => (fast.optimal_fidelity_sq, full.optimal_fidelity_sq),
                DistanceKind::Trace => (fast.optimal_error, full.optimal_error),
            };
            assert!((a - b).abs() < 1e-5, "{n},{m} {kind}: {a} vs {b}");
            // the rebuilt Choi matrix is a valid channel with the same error
            let ch = fast.channel.as_ref().unwrap();
            assert!(ch.tp_residual() <= 1e-7);
            assert!(ch.min_choi_eigenvalue() >= -1e-8);
        }
    }
}

#[test]
fn rebuilt_channel_in_rotated_basis_is_valid() {
    // commuting but not diagonal: conjugate a classical instance by a rotation
    let (c, s) = (0.6f64, 0.8f64);
    let u = DMatrix::from_row_slice(2, 2, &[c, -s, s, c]).map(|x| Complex64::new(x, 0.0));
    let rot = |p: [f64; 2]| {
        DensityOperator::new(HermitianOperator::diagonal(&p).conjugate_by(&u).unwrap()).unwrap()
    };
    let d1 = Dichotomy::new(rot([0.8, 0.2]), rot([0.3, 0.7])).unwrap();
    let d2 = Dichotomy::classical(&[0.6, 0.4], &[0.5, 0.5]).unwrap();
    let fast = eps_for_counts(&d1, &d2, 2, 2, DistanceKind::Purified, TOL, PathChoice::Auto).unwrap();
    assert_eq!(fast.path, SolverPath::Classical);
    let sigma_in = DensityOperator::new(dichotomy_core::operator::tensor_power(d1.sigma(), 2)).unwrap();
    let sigma_t = DensityOperator::new(dichotomy_core::operator::tensor_power(d2.sigma(), 2)).unwrap();
    assert_valid_channel(&fast, &sigma_in, &sigma_t);
    let rho_in = DensityOperator::new(dichotomy_core::operator::tensor_power(d1.rho(), 2)).unwrap();
    let rho_t = DensityOperator::new(dichotomy_core::operator::tensor_power(d2.rho(), 2)).unwrap();
    let out = DensityOperator::new(fast.channel.as_ref().unwrap().apply(&rho_in).unwrap()).unwrap();
    let f = fidelity(&out, &rho_t).unwrap();
    assert!((f * f - fast.optimal_fidelity_sq).abs() < 1e-6);
}

#[test]
fn zero_target_copies_cost_nothing() {
    let d = Dichotomy::classical(&[0.9, 0.1], &[0.5, 0.5]).unwrap();
    let res = eps_at_rate(&d, &d, 0.4, 2, DistanceKind::Trace, TOL).unwrap();
    assert_eq!((res.m, res.optimal_error), (0, 0.0));
}

#[test]
fn identical_quantum_qubits_at_unit_rate() {
    let d = Dichotomy::new(random_density(2, 2, 71).unwrap(), random_density(2, 2, 72).unwrap()).unwrap();
    assert!(classical_reduce(&d, &d).is_none());
    let res = eps_at_rate(&d, &d, 1.0, 2, DistanceKind::Trace, TOL).unwrap();
    assert_eq!(res.m, 2);
    assert!(res.optimal_error < 1e-7, "{}", res.optimal_error);
    let res = eps_at_rate(&d, &d, 1.0, 2, DistanceKind::Purified, TOL).unwrap();
    assert!((res.optimal_fidelity_sq - 1.0).abs() < 1e-7);
}

#[test]
fn cap_violations_are_reported() {
    let d = Dichotomy::new(random_density(2, 2, 1).unwrap(), random_density(2, 2, 2).unwrap()).unwrap();
    let err = eps_at_rate(&d, &d, 1.0, 7, DistanceKind::Trace, TOL).unwrap_err();
    assert!(err.to_string().contains("2^7"), "{err}");
}

#[test]
fn max_count_of_identical_dichotomies() {
    let d = Dichotomy::classical(&[0.8, 0.2], &[0.3, 0.7]).unwrap();
    let res = max_transform_count(&d, &d, 3, 0.0, DistanceKind::Purified, TOL).unwrap();
    assert!(res.m >= 3, "{}", res.m);
    assert!(res.monotonicity_violations.is_empty());
    let all = max_transform_count(&d, &d, 3, 1.0, DistanceKind::Trace, TOL).unwrap();
    assert_eq!(all.m, transform_count_limit(&d, &d, 3).unwrap());
    let q = Dichotomy::new(random_density(2, 2, 5).unwrap(), random_density(2, 2, 6).unwrap()).unwrap();
    let all = max_transform_count(&q, &q, 2, 1.0, DistanceKind::Purified, TOL).unwrap();
    assert_eq!(all.m, 10);
}

#[test]
fn max_count_round_trips_through_the_solver() {
    let d1 = Dichotomy::classical(&[0.9, 0.1], &[0.5, 0.5]).unwrap();
    let d2 = Dichotomy::classical(&[0.7, 0.3], &[0.4, 0.6]).unwrap();
    let n = 4;
    for kind in [DistanceKind::Purified, DistanceKind::Trace] {
        for eps in [0.05, 0.2] {
            let res = max_transform_count(&d1, &d2, n, eps, kind, TOL).unwrap();
            assert!(res.monotonicity_violations.is_empty());
            let at = eps_at_rate(&d1, &d2, res.m as f64 / n as f64, n, kind, TOL).unwrap();
            assert_eq!(at.m, res.m);
            assert!(at.optimal_error <= eps + 1e-6, "{kind} eps {eps}: {}", at.optimal_error);
            if res.m < res.limit {
                let next = eps_for_counts(&d1, &d2, n, res.m + 1, kind, TOL, PathChoice::Auto).unwrap();
                assert!(next.optimal_error > eps, "{kind} eps {eps}: {}", next.optimal_error);
            }
        }
    }
}

#[test]
fn fidelity_is_nonincreasing_in_target_count() {
    let d1 = Dichotomy::classical(&[0.6, 0.3, 0.1], &[0.2, 0.3, 0.5]).unwrap();
    let d2 = Dichotomy::classical(&[0.7, 0.3], &[0.4, 0.6]).unwrap();
    let mut last = 1.0;
    for m in 1..=8 {
        let res = eps_for_counts(&d1, &d2, 3, m, DistanceKind::Purified, TOL, PathChoice::Auto).unwrap();
        assert!(res.optimal_fidelity_sq <= last + 1e-7);
        assert!(res.neg_log_fid_rate() >= -1e-6);
        last = res.optimal_fidelity_sq;
    }
}
