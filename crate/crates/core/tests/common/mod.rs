//! Shared generators and helpers for integration tests.
#![allow(dead_code)]

use locc_bounds::linalg::{CMatrix, CVector, HermitianOp, SystemShape, C64};
use proptest::prelude::*;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Hermitian matrix `(G + G†)/2` from raw entries.
pub fn hermitian_from(n: usize, raw: &[(f64, f64)]) -> CMatrix {
    let g = CMatrix::from_fn(n, n, |r, col| {
        let (a, b) = raw[r * n + col];
        c(a, b)
    });
    (&g + g.adjoint()).scale(0.5)
}

pub fn arb_hermitian(dims: Vec<usize>) -> impl Strategy<Value = HermitianOp> {
    let shape = SystemShape::new(dims).unwrap();
    let n = shape.total();
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n * n)
        .prop_map(move |raw| HermitianOp::new(shape.clone(), hermitian_from(n, &raw)).unwrap())
}

/// Random density matrix `G G† / Tr`.
pub fn arb_density(dims: Vec<usize>) -> impl Strategy<Value = HermitianOp> {
    let shape = SystemShape::new(dims).unwrap();
    let n = shape.total();
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n * n).prop_map(move |raw| {
        let g = CMatrix::from_fn(n, n, |r, col| {
            let (a, b) = raw[r * n + col];
            c(a, b)
        });
        let mut m = &g * g.adjoint();
        let t = m.trace().re.max(1e-12);
        m.unscale_mut(t);
        HermitianOp::new(shape.clone(), (&m + m.adjoint()).scale(0.5)).unwrap()
    })
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn diff(a: &HermitianOp, b: &HermitianOp) -> f64 {
    max_abs(&(a.matrix() - b.matrix()))
}

pub fn ket(entries: &[(f64, f64)]) -> CVector {
    CVector::from_iterator(entries.len(), entries.iter().map(|&(a, b)| c(a, b)))
}
