// Shared proptest strategies. Included with `mod common;`.
#![allow(dead_code)]

use distill_core::matcore::{CMatrix, C64};
use distill_core::states::DensityMatrix;
use proptest::prelude::*;

pub fn complex() -> impl Strategy<Value = C64> {
    (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(re, im)| C64::new(re, im))
}

pub fn matrix(n: usize) -> impl Strategy<Value = CMatrix> {
    proptest::collection::vec(complex(), n * n).prop_map(move |v| CMatrix::from_entries(n, v))
}

pub fn hermitian(n: usize) -> impl Strategy<Value = CMatrix> {
    matrix(n).prop_map(|a| (&a + &a.adjoint()).scale_real(0.5))
}

/// `A A† / Tr`, full rank with probability one.
pub fn density(n: usize) -> impl Strategy<Value = DensityMatrix> {
    matrix(n).prop_filter_map("degenerate", |a| {
        let m = &a * &a.adjoint();
        let t = m.trace().re;
        (t > 1e-6).then(|| DensityMatrix::new(m.scale_real(1.0 / t)).unwrap())
    })
}

/// Pure state `|v⟩⟨v|`.
pub fn pure(n: usize) -> impl Strategy<Value = DensityMatrix> {
    proptest::collection::vec(complex(), n).prop_filter_map("zero vector", move |v| {
        let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        (norm > 1e-3).then(|| {
            let v: Vec<C64> = v.iter().map(|z| z / norm).collect();
            DensityMatrix::new(CMatrix::outer(&v, &v)).unwrap()
        })
    })
}
