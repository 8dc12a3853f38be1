use distill_cli::emit::{
    chi_json, counts_csv, counts_from_csv, fmt_num, json_string, matrix_from_json, matrix_json, parse_json, Basis,
};
use distill_core::channels::chi_ideal;
use distill_core::matcore::{CMatrix, C64};
use distill_core::states::{bell, density_from_ket, Family};
use distill_core::tomography::{one_qubit_settings, simulate_counts, two_qubit_settings, Noise};
use proptest::prelude::*;

#[test]
fn bell_matrix_json() {
    let rho = density_from_ket(&bell(Family::Phi));
    let v = matrix_json(rho.matrix(), Basis::TwoQubit);
    assert_eq!(v["basis"], "HH,HV,VH,VV");
    for (i, j) in [(0, 0), (0, 3), (3, 0), (3, 3)] {
        assert_eq!(v["matrix"][i][j].to_string(), "[0.5,0]");
    }
    assert_eq!(v["matrix"][1][1].to_string(), "[0,0]");
    let text = json_string(&v);
    assert!(text.contains("\"basis\": \"HH,HV,VH,VV\""));
    assert!(text.ends_with("]\n}\n"));
}

#[test]
fn chi_ideal_json() {
    let v = chi_json(&chi_ideal(0.0).unwrap());
    assert_eq!(v["basis"], "I,X,Y,Z");
    let mut quarter = 0;
    for i in 0..4 {
        for j in 0..4 {
            let e = v["matrix"][i][j].to_string();
            if e == "[0.25,0]" {
                quarter += 1;
                assert!((i == 0 || i == 3) && (j == 0 || j == 3));
            } else {
                assert_eq!(e, "[0,0]", "({i},{j})");
            }
        }
    }
    assert_eq!(quarter, 4);
}

#[test]
fn counts_csv_layout() {
    let rho = density_from_ket(&bell(Family::Phi));
    let t = simulate_counts(&rho, &two_qubit_settings(), 1000.0, Noise::None, 0).unwrap();
    let text = counts_csv(&t);
    assert!(text.starts_with("arm1,arm2,count\n"));
    assert!(text.contains("\nH,H,500\n"));
    assert_eq!(text.lines().count(), 17);
    assert!(!text.contains('\r'));
}

#[test]
fn one_qubit_counts_round_trip() {
    let rho = distill_core::states::DensityMatrix::maximally_mixed(2);
    let t = simulate_counts(&rho, &one_qubit_settings(), 800.0, Noise::None, 0).unwrap();
    let text = counts_csv(&t);
    assert!(text.contains("\nH,,400\n"));
    let back = counts_from_csv(&text, 800.0).unwrap();
    assert_eq!(back, t);
    assert_eq!(counts_csv(&back), text);
}

#[test]
fn malformed_count_tables_are_rejected() {
    assert!(counts_from_csv("a,b,c\n", 1.0).is_err());
    assert!(counts_from_csv("arm1,arm2,count\nQ,H,3\n", 1.0).is_err());
    assert!(counts_from_csv("arm1,arm2,count\nH,H,-3\n", 1.0).is_err());
    assert!(counts_from_csv("arm1,arm2,count\n,H,3\n", 1.0).is_err());
}

fn arb_matrix(n: usize) -> impl Strategy<Value = CMatrix> {
    proptest::collection::vec((-1e3f64..1e3, -1e3f64..1e3), n * n)
        .prop_map(move |v| CMatrix::from_entries(n, v.into_iter().map(|(re, im)| C64::new(re, im)).collect()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn fmt_num_keeps_twelve_digits(x in prop_oneof![-1e300f64..1e300, -1.0f64..1.0, -1e-200f64..1e-200]) {
        let s = fmt_num(x);
        let y: f64 = s.parse().unwrap();
        prop_assert!((x - y).abs() <= 5e-12 * x.abs(), "{x} -> {s}");
        prop_assert_eq!(fmt_num(y), s);
    }

    #[test]
    fn matrix_json_round_trip_is_byte_identical(m in prop_oneof![arb_matrix(2), arb_matrix(4)]) {
        let basis = Basis::for_state(m.dim());
        let first = json_string(&matrix_json(&m, basis));
        let (back, b) = matrix_from_json(&parse_json(&first).unwrap()).unwrap();
        prop_assert_eq!(b, basis);
        prop_assert!(back.max_abs_diff(&m) <= 1e-11 * 1e3);
        prop_assert_eq!(json_string(&matrix_json(&back, b)), first);
    }

    #[test]
    fn counts_csv_round_trip_is_byte_identical(counts in proptest::collection::vec(0u64..1_000_000_000, 16)) {
        let rho = density_from_ket(&bell(Family::Psi));
        let t = simulate_counts(&rho, &two_qubit_settings(), 1.0, Noise::None, 0)
            .unwrap()
            .map_counts(|i, _| counts[i]);
        let first = counts_csv(&t);
        let back = counts_from_csv(&first, 1.0).unwrap();
        prop_assert_eq!(&back, &t);
        prop_assert_eq!(counts_csv(&back), first);
    }
}
