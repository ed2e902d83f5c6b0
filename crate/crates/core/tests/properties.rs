use proptest::prelude::*;

use dichotomy_core::divergence::{
    d_max, fidelity, purified_distance, renyi_divergence, trace_distance, umegaki, DivergenceKind,
};
use dichotomy_core::format::g12;
use dichotomy_core::operator::{
    apply_pinching, partial_trace, pinching_map, random_channel, random_density, tensor,
    DensityOperator, StateFile, DEFAULT_DEGENERACY_TOLERANCE,
};

fn pair() -> impl Strategy<Value = (DensityOperator, DensityOperator)> {
    (2usize..=5, any::<u64>(), any::<u64>()).prop_flat_map(|(d, s1, s2)| {
        (1..=d).prop_map(move |rank| {
            (random_density(d, rank, s1).unwrap(), random_density(d, d, s2).unwrap())
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn partial_trace_undoes_tensor(da in 2usize..=3, db in 2usize..=3, s1: u64, s2: u64) {
        let a = random_density(da, da, s1).unwrap();
        let b = random_density(db, db, s2).unwrap();
        let ab = tensor(&a, &b);
        let back_a = partial_trace(&ab, &[da, db], &[0]).unwrap();
        let back_b = partial_trace(&ab, &[da, db], &[1]).unwrap();
        prop_assert!(back_a.approx_eq(&a, 1e-12));
        prop_assert!(back_b.approx_eq(&b, 1e-12));
    }

    #[test]
    fn pinching_is_an_idempotent_unital_projection((rho, sigma) in pair()) {
        let map = pinching_map(&sigma, DEFAULT_DEGENERACY_TOLERANCE);
        let once = apply_pinching(&map, &rho).unwrap();
        let twice = apply_pinching(&map, &once).unwrap();
        prop_assert!(once.approx_eq(&twice, 1e-12));
        prop_assert!((once.trace() - 1.0).abs() < 1e-12);
        prop_assert!(map.v() <= rho.dim());
    }

    #[test]
    fn divergences_of_states_are_nonnegative((rho, sigma) in pair(), alpha in 0.55f64..3.0) {
        prop_assume!((alpha - 1.0).abs() > 1e-3);
        for kind in [DivergenceKind::Sandwiched, DivergenceKind::Petz, DivergenceKind::LogEuclidean] {
            let v = renyi_divergence(kind, alpha, &rho, &sigma).unwrap().value;
            prop_assert!(v >= -1e-10, "{kind:?} {v}");
        }
        prop_assert!(umegaki(&rho, &sigma).unwrap().value >= -1e-10);
    }

    #[test]
    fn max_divergence_bounds_sandwiched((rho, sigma) in pair()) {
        let dmax = d_max(&rho, &sigma).unwrap().value;
        for beta in [2.0, 10.0, 100.0] {
            let v = renyi_divergence(DivergenceKind::Sandwiched, beta, &rho, &sigma).unwrap().value;
            prop_assert!(v <= dmax + 1e-9, "beta {beta}: {v} > {dmax}");
        }
    }

    #[test]
    fn fidelity_symmetric_and_bounded((rho, sigma) in pair()) {
        let f = fidelity(&rho, &sigma).unwrap();
        let g = fidelity(&sigma, &rho).unwrap();
        prop_assert!((f - g).abs() < 1e-10);
        let d = trace_distance(&rho, &sigma).unwrap();
        let p = purified_distance(&rho, &sigma).unwrap();
        // Fuchs–van de Graaf
        prop_assert!(1.0 - f <= d + 1e-10);
        prop_assert!(d <= p + 1e-10);
    }

    #[test]
    fn channels_contract_trace_distance((rho, sigma) in pair(), dout in 2usize..=4, seed: u64) {
        let env = rho.dim().div_ceil(dout).max(2);
        let ch = random_channel(rho.dim(), dout, env, seed).unwrap();
        prop_assert!(ch.tp_residual() < 1e-10);
        let a = DensityOperator::normalized(&ch.apply(&rho).unwrap()).unwrap();
        let b = DensityOperator::normalized(&ch.apply(&sigma).unwrap()).unwrap();
        prop_assert!(trace_distance(&a, &b).unwrap() <= trace_distance(&rho, &sigma).unwrap() + 1e-10);
        prop_assert!(fidelity(&a, &b).unwrap() + 1e-10 >= fidelity(&rho, &sigma).unwrap());
    }

    #[test]
    fn state_file_round_trip((rho, _s) in pair()) {
        let file = StateFile::from_operator(&rho);
        let text = serde_json::to_string(&file).unwrap();
        let back: StateFile = serde_json::from_str(&text).unwrap();
        let op = back.to_operator().unwrap();
        prop_assert_eq!(op.matrix(), rho.matrix());
    }

    #[test]
    fn twelve_digit_output_round_trips(x in -1e6f64..1e6) {
        let y: f64 = g12(x).parse().unwrap();
        prop_assert!((x - y).abs() <= 1e-11 * x.abs().max(1e-300));
    }
}
