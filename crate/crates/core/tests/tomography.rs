mod common;

use distill_core::channels::{chi_ideal, partial_polarizer, PartialPolarizerParams};
use distill_core::matcore::herm_eig;
use distill_core::metrics::process_fidelity;
use distill_core::tomography::{
    linear_inversion, log_likelihood, one_qubit_settings, qpt_single_qubit, qst_linear, qst_mle, simulate_counts,
    simulate_qpt, two_qubit_settings, Noise,
};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn linear_round_trip_two_qubits(rho in common::density(4)) {
        let t = simulate_counts(&rho, &two_qubit_settings(), 1e12, Noise::None, 0).unwrap();
        let r = qst_linear(&t).unwrap();
        prop_assert!(r.rho.matrix().max_abs_diff(rho.matrix()) < 1e-10);
    }

    #[test]
    fn linear_round_trip_one_qubit(rho in common::density(2)) {
        let t = simulate_counts(&rho, &one_qubit_settings(), 1e12, Noise::None, 0).unwrap();
        prop_assert!(qst_linear(&t).unwrap().rho.matrix().max_abs_diff(rho.matrix()) < 1e-10);
    }

    #[test]
    fn mle_round_trip_two_qubits(rho in common::density(4)) {
        let t = simulate_counts(&rho, &two_qubit_settings(), 1e12, Noise::None, 0).unwrap();
        let r = qst_mle(&t).unwrap();
        prop_assert!(r.rho.matrix().max_abs_diff(rho.matrix()) < 1e-5);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mle_likelihood_dominates_linear(rho in common::pure(4), seed in any::<u64>()) {
        let t = simulate_counts(&rho, &two_qubit_settings(), 500.0, Noise::Poisson, seed).unwrap();
        let lin = qst_linear(&t).unwrap();
        let mle = qst_mle(&t).unwrap();
        let l_lin = log_likelihood(&lin.rho, &t).unwrap();
        let l_mle = mle.log_likelihood.unwrap();
        prop_assert!(l_mle >= l_lin - 1e-6 * l_lin.abs().max(1.0), "mle {l_mle} < linear {l_lin}");
        prop_assert!((log_likelihood(&mle.rho, &t).unwrap() - l_mle).abs() < 1e-6 * l_mle.abs().max(1.0));
    }

    #[test]
    fn mle_is_positive_where_inversion_is_not(rho in common::pure(4), seed in any::<u64>()) {
        let t = simulate_counts(&rho, &two_qubit_settings(), 500.0, Noise::Poisson, seed).unwrap();
        let raw_min = herm_eig(&linear_inversion(&t).unwrap()).unwrap().min_value();
        prop_assume!(raw_min < -1e-6);
        let mle = qst_mle(&t).unwrap();
        let e = herm_eig(mle.rho.matrix()).unwrap();
        prop_assert!(e.min_value() >= -1e-12);
        prop_assert!((mle.rho.matrix().trace().re - 1.0).abs() < 1e-12);
        let lin = qst_linear(&t).unwrap();
        prop_assert!(lin.clipped_mass > 0.0);
        prop_assert!(herm_eig(lin.rho.matrix()).unwrap().min_value() >= -1e-12);
    }

    #[test]
    fn qpt_noiseless_round_trip(tv in 0.0f64..=1.0, seed in any::<u64>()) {
        let ch = partial_polarizer(&PartialPolarizerParams::new(tv)).unwrap();
        let r = qpt_single_qubit(&simulate_qpt(&ch, 1e12, Noise::None, seed).unwrap()).unwrap();
        prop_assert!((r.chi.trace() - (1.0 + tv) / 2.0).abs() < 1e-8);
        prop_assert!(process_fidelity(&r.chi, &chi_ideal(tv).unwrap()).unwrap() > 1.0 - 1e-8);
    }
}
