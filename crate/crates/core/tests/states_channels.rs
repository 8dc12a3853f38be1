mod common;

use distill_core::channels::{
    apply_local, chi_ideal, distilled_analytic, distilled_success_probability, partial_polarizer, Arm,
    PartialPolarizerParams,
};
use distill_core::matcore::{herm_eig, CMatrix, C64};
use distill_core::metrics::{
    concurrence, eof, eof_from_concurrence, estimate_epsilon, estimate_lambda, process_fidelity, purity,
};
use distill_core::states::{
    make_mixed_approx, make_mixed_exact, make_mixed_via_kraus, DensityMatrix, Family, MixedPrepParams,
};
use proptest::prelude::*;

fn family() -> impl Strategy<Value = Family> {
    prop_oneof![Just(Family::Phi), Just(Family::Psi)]
}

fn grid(n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// X-state from populations (a, b, c, d) and coherences z = ρ₀₃, w = ρ₁₂.
fn x_state(p: [f64; 4], z: C64, w: C64) -> CMatrix {
    let mut m = CMatrix::from_real_diag(&p);
    m[(0, 3)] = z;
    m[(3, 0)] = z.conj();
    m[(1, 2)] = w;
    m[(2, 1)] = w.conj();
    m
}

fn arb_x_state() -> impl Strategy<Value = (CMatrix, f64)> {
    (
        proptest::collection::vec(0.0f64..1.0, 4),
        0.0f64..=1.0,
        0.0f64..=1.0,
        0.0f64..std::f64::consts::TAU,
        0.0f64..std::f64::consts::TAU,
    )
        .prop_filter_map("zero trace", |(p, r1, r2, a1, a2)| {
            let t: f64 = p.iter().sum();
            if t < 1e-3 {
                return None;
            }
            let p = [p[0] / t, p[1] / t, p[2] / t, p[3] / t];
            let z = C64::from_polar(r1 * (p[0] * p[3]).sqrt(), a1);
            let w = C64::from_polar(r2 * (p[1] * p[2]).sqrt(), a2);
            let closed = 2.0
                * (z.norm() - (p[1] * p[2]).sqrt())
                    .max(w.norm() - (p[0] * p[3]).sqrt())
                    .max(0.0);
            Some((x_state(p, z, w), closed))
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn x_state_concurrence_matches_closed_form((m, closed) in arb_x_state()) {
        let rho = DensityMatrix::new(m).unwrap();
        let c = concurrence(&rho).unwrap();
        prop_assert!((c - closed).abs() < 1e-9, "spectral {c} vs closed {closed}");
    }

    #[test]
    fn metric_ranges(rho in common::density(4)) {
        let p = purity(&rho);
        prop_assert!((0.25 - 1e-12..=1.0 + 1e-12).contains(&p));
        let c = concurrence(&rho).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&c));
        let e = eof(&rho).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&e));
    }

    #[test]
    fn eof_is_monotone_in_concurrence(a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(eof_from_concurrence(lo) <= eof_from_concurrence(hi) + 1e-15);
    }

    #[test]
    fn exact_state_matches_kraus_evaluation(
        e in 0.01f64..=1.0, l in 0.0f64..=1.0, th in -3.2f64..3.2, f in family()
    ) {
        let p = MixedPrepParams { epsilon: e, lambda: l, theta: th, family: f };
        let exact = make_mixed_exact(&p).unwrap();
        let kraus = make_mixed_via_kraus(&p).unwrap();
        prop_assert!(exact.matrix().max_abs_diff(kraus.matrix()) < 1e-13);
        prop_assert!(herm_eig(exact.matrix()).unwrap().min_value() > -1e-12);
    }

    #[test]
    fn exact_at_zero_theta_is_the_leading_order_family(e in 0.01f64..=1.0, l in 0.0f64..=1.0, f in family()) {
        let exact = make_mixed_exact(&MixedPrepParams { epsilon: e, lambda: l, theta: 0.0, family: f }).unwrap();
        // At θ = 0 the coherence scales by √(1−λ) = 1 − λ'/2.
        let effective = 2.0 * (1.0 - (1.0 - l).sqrt());
        if effective <= 1.0 {
            let approx = make_mixed_approx(e, effective, f).unwrap();
            prop_assert!(exact.matrix().max_abs_diff(approx.matrix()) < 1e-14);
        }
        let first_order = make_mixed_approx(e, l, f).unwrap();
        let gap = e / (1.0 + e * e) * (1.0 - l / 2.0 - (1.0 - l).sqrt());
        prop_assert!(gap >= 0.0);
        prop_assert!((exact.matrix().max_abs_diff(first_order.matrix()) - gap).abs() < 1e-15);
    }

    #[test]
    fn distilled_epsilon_and_lambda_are_predicted(
        e in 0.05f64..=1.0, l in 0.0f64..0.95, tv in 0.01f64..=1.0, th in 0.3f64..=1.0, f in family()
    ) {
        let params = PartialPolarizerParams { t_h: th, t_v: tv };
        let (out, _) = apply_local(&partial_polarizer(&params).unwrap(), &make_mixed_approx(e, l, f).unwrap(), Arm::First).unwrap();
        let eps_out = estimate_epsilon(&out, f).unwrap();
        prop_assert!((eps_out - e * (th / tv).sqrt()).abs() < 1e-12 * (1.0 + eps_out));
        prop_assert!((estimate_lambda(&out, f).unwrap() - l).abs() < 1e-10);
    }

    #[test]
    fn filtering_toward_balance_never_loses_entanglement(
        e in 0.05f64..=1.0, l in 0.0f64..=1.0, s in 0.0f64..=1.0, t in 0.0f64..=1.0, f in family()
    ) {
        // Two transmissions in [ε², 1]; the one nearer ε² distills more.
        let lo = e * e + (1.0 - e * e) * s.min(t);
        let hi = e * e + (1.0 - e * e) * s.max(t);
        let rho = make_mixed_approx(e, l, f).unwrap();
        let c0 = concurrence(&rho).unwrap();
        let c = |tv: f64| {
            let ch = partial_polarizer(&PartialPolarizerParams::new(tv)).unwrap();
            concurrence(&apply_local(&ch, &rho, Arm::First).unwrap().0).unwrap()
        };
        let (c_lo, c_hi) = (c(lo), c(hi));
        prop_assert!(c_lo + 1e-12 >= c_hi);
        prop_assert!(c_hi + 1e-12 >= c0);
    }

    #[test]
    fn process_fidelity_is_symmetric_and_bounded(a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
        let (x, y) = (chi_ideal(a).unwrap(), chi_ideal(b).unwrap());
        let fxy = process_fidelity(&x, &y).unwrap();
        prop_assert!((fxy - process_fidelity(&y, &x).unwrap()).abs() < 1e-12);
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&fxy));
        prop_assert!((process_fidelity(&x, &x).unwrap() - 1.0).abs() < 1e-9);
    }
}

#[test]
fn distilled_analytic_matches_kraus_on_a_grid() {
    let mut checked = 0;
    for f in [Family::Phi, Family::Psi] {
        for &e in &grid(5, 0.1, 1.0) {
            for &l in &grid(5, 0.0, 1.0) {
                for &tv in &grid(5, 0.05, 1.0) {
                    let params = PartialPolarizerParams::new(tv);
                    let rho = make_mixed_approx(e, l, f).unwrap();
                    let (num, p) = apply_local(&partial_polarizer(&params).unwrap(), &rho, Arm::First).unwrap();
                    let ana = distilled_analytic(e, l, &params, f).unwrap();
                    assert!(
                        num.matrix().max_abs_diff(ana.matrix()) < 1e-12,
                        "{f:?} ε={e} λ={l} t_v={tv}"
                    );
                    assert!((p - distilled_success_probability(e, &params)).abs() < 1e-12);
                    checked += 1;
                }
            }
        }
    }
    assert_eq!(checked, 250);
}
