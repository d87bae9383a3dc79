//! Shared fixtures for the pipeline benchmarks: deterministic designs,
//! overlap matrices, and rate tables so every run measures the same work.

use mcphase::{
    all_rates, build_sparse_unitary, CoincidenceReport, GramMatrix, InputConfig, SparseDesign,
};
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

pub fn design(n: usize) -> SparseDesign {
    build_sparse_unitary(n).expect("n >= 3")
}

/// Deterministic partially distinguishable Gram for `n` photons.
pub fn gram(n: usize) -> GramMatrix {
    GramMatrix::random(n, n, 0xBE2C + n as u64)
}

pub fn input(n: usize) -> InputConfig {
    InputConfig::new((0..n).map(|i| 2 * i + 1).collect()).expect("odd ports")
}

/// Full collision-free rate table for the n-photon sparse design.
pub fn rate_table(n: usize) -> CoincidenceReport {
    let d = design(n);
    all_rates(d.unitary(), &gram(n), &input(n)).expect("sparse table")
}

/// Dense complex matrix with entries of order one, deterministic per size.
pub fn dense_matrix(n: usize) -> DMatrix<C64> {
    DMatrix::from_fn(n, n, |i, j| {
        let k = (i * n + j) as f64;
        C64::new((0.37 * k + 0.11).sin(), (0.53 * k + 0.07).cos())
    })
}
