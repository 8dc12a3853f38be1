mod common;

use common::{density, hermitian, matrix};
use distill_core::matcore::{herm_eig, kron, pauli, psd_clip, psd_sqrt, solve_real, CMatrix, C64};
use proptest::prelude::*;

fn small_dim() -> impl Strategy<Value = usize> {
    prop_oneof![Just(2usize), Just(4usize)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn eigendecomposition_reconstructs(m in small_dim().prop_flat_map(hermitian)) {
        let e = herm_eig(&m).unwrap();
        let n = m.dim();
        prop_assert!(e.reconstruct().max_abs_diff(&m) < 1e-12);
        let v = &e.vectors;
        prop_assert!((&v.adjoint() * v).max_abs_diff(&CMatrix::identity(n)) < 1e-12);
        prop_assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
        let sum: f64 = e.values.iter().sum();
        prop_assert!((sum - m.trace().re).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn kron_mixed_product(a in matrix(2), b in matrix(2), c in matrix(2), d in matrix(2)) {
        let lhs = &kron(&a, &b) * &kron(&c, &d);
        let rhs = kron(&(&a * &c), &(&b * &d));
        prop_assert!(lhs.max_abs_diff(&rhs) < 1e-13);
    }

    #[test]
    fn kron_adjoint_and_trace(a in matrix(2), b in matrix(2)) {
        let k = kron(&a, &b);
        prop_assert!(k.adjoint().max_abs_diff(&kron(&a.adjoint(), &b.adjoint())) < 1e-15);
        prop_assert!((k.trace() - a.trace() * b.trace()).norm() < 1e-13);
    }

    #[test]
    fn trace_is_cyclic(a in matrix(4), b in matrix(4), c in matrix(4)) {
        let abc = (&(&a * &b) * &c).trace();
        let bca = (&(&b * &c) * &a).trace();
        let cab = (&(&c * &a) * &b).trace();
        prop_assert!((abc - bca).norm() < 1e-12);
        prop_assert!((abc - cab).norm() < 1e-12);
    }

    #[test]
    fn adjoint_reverses_products(a in matrix(4), b in matrix(4)) {
        let lhs = (&a * &b).adjoint();
        let rhs = &b.adjoint() * &a.adjoint();
        prop_assert!(lhs.max_abs_diff(&rhs) < 1e-14);
        prop_assert_eq!(a.adjoint().adjoint(), a);
    }

    #[test]
    fn psd_sqrt_squares_back(rho in small_dim().prop_flat_map(density)) {
        let s = psd_sqrt(rho.matrix()).unwrap();
        prop_assert!(s.is_hermitian(1e-12));
        prop_assert!((&s * &s).max_abs_diff(rho.matrix()) < 1e-10);
        prop_assert!(herm_eig(&s).unwrap().min_value() >= -1e-12);
    }

    #[test]
    fn psd_sqrt_fixes_projectors(rho in small_dim().prop_flat_map(common::pure)) {
        let s = psd_sqrt(rho.matrix()).unwrap();
        prop_assert!(s.max_abs_diff(rho.matrix()) < 1e-12);
    }

    #[test]
    fn psd_clip_leaves_states_alone(rho in density(4)) {
        let (c, mass) = psd_clip(rho.matrix()).unwrap();
        prop_assert_eq!(mass, 0.0);
        prop_assert!(c.max_abs_diff(rho.matrix()) < 1e-12);
    }

    #[test]
    fn psd_clip_output_is_positive(h in hermitian(4)) {
        let (c, mass) = psd_clip(&h).unwrap();
        prop_assert!(mass >= 0.0);
        prop_assert!(herm_eig(&c).unwrap().min_value() >= -1e-12);
    }

    #[test]
    fn linear_solve_inverts(a in proptest::collection::vec(-1.0f64..1.0, 16), x in proptest::collection::vec(-1.0f64..1.0, 4)) {
        let mut a = a;
        for i in 0..4 {
            a[i * 4 + i] += 5.0;
        }
        let b: Vec<f64> = (0..4).map(|i| (0..4).map(|j| a[i * 4 + j] * x[j]).sum()).collect();
        let y = solve_real(a, b).unwrap();
        for (u, v) in x.iter().zip(&y) {
            prop_assert!((u - v).abs() < 1e-12);
        }
    }
}

#[test]
fn pauli_algebra() {
    let i = C64::new(0.0, 1.0);
    let (x, y, z) = (pauli(1), pauli(2), pauli(3));
    assert_eq!(&x * &y, z.scale(i));
    assert_eq!(&y * &z, x.scale(i));
    assert_eq!(&z * &x, y.scale(i));
    for k in 0..4 {
        let p = pauli(k);
        assert_eq!(&p * &p, CMatrix::identity(2));
        assert!(p.is_hermitian(0.0));
    }
}
