#![allow(dead_code)]

use egr::Weights;
use proptest::prelude::*;

/// Interior point of the simplex of dimension n.
pub fn interior(n: usize) -> impl Strategy<Value = Weights> {
    prop::collection::vec(0.05f64..1.0, n).prop_map(|v| egr::simplex::normalize(&v).unwrap())
}

/// Simplex point of dimension n with some coordinates forced to zero
/// (at least one survives).
pub fn with_zeros(n: usize) -> impl Strategy<Value = Weights> {
    (
        prop::collection::vec(0.05f64..1.0, n),
        prop::collection::vec(any::<bool>(), n),
        0..n,
    )
        .prop_map(|(mut v, zero, keep)| {
            for i in 0..v.len() {
                if zero[i] && i != keep {
                    v[i] = 0.0;
                }
            }
            egr::simplex::normalize(&v).unwrap()
        })
}

pub fn gross(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.2f64..5.0, n)
}

pub fn log_returns(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0f64..2.0, n)
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

pub fn vec_close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}
