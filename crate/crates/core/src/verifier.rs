//! Permanent computation, Fourier matrices, Haar-random unitary sampling,
//! a product-form permanent bound, and numerical evidence gathering for the
//! conjecture that the Fourier matrix maximizes the full-cycle interference
//! weight `|perm(conj(U) o U_sigma)|` (elementwise product, columns of the
//! second factor permuted by sigma), whose conjectured maximum is n!/n^n.

use crate::engine::{validate_unitary, ScatteringMatrix};
use crate::photon::Permutation;
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use std::f64::consts::TAU;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum VerifierError {
    #[error("matrix is {rows}x{cols}, expected square")]
    NonSquare { rows: usize, cols: usize },
    #[error("permanent size {0} exceeds the supported maximum 20")]
    TooLarge(usize),
    #[error("permutation is not a single cycle through all {0} labels")]
    NotFullCycle(usize),
    #[error("size mismatch: matrix is {matrix}, permutation acts on [1..{perm}]")]
    SizeMismatch { matrix: usize, perm: usize },
    #[error("sweep requires n in [3..7], got {0}")]
    SweepSizeOutOfRange(usize),
    #[error("sweep requires at least one sample")]
    NoSamples,
}

/// Permanent by Ryser's inclusion-exclusion formula with Gray-code column
/// updates, O(2^n n). Exact up to floating error; practical to n = 20.
pub fn ryser_permanent(a: &DMatrix<C64>) -> Result<C64, VerifierError> {
    let n = a.nrows();
    if a.ncols() != n || n == 0 {
        return Err(VerifierError::NonSquare { rows: n, cols: a.ncols() });
    }
    if n > 20 {
        return Err(VerifierError::TooLarge(n));
    }
    // perm(A) = (-1)^n sum_{S subset of columns} (-1)^{|S|} prod_i rowsum_S(i).
    // Gray-code order toggles one column per step, updating row sums in O(n).
    let mut row_sums = vec![C64::new(0.0, 0.0); n];
    let mut total = C64::new(0.0, 0.0);
    let mut gray: u64 = 0;
    let mut popcount: i32 = 0;
    for k in 1u64..(1u64 << n) {
        let next = k ^ (k >> 1);
        let toggled = (gray ^ next).trailing_zeros() as usize;
        let added = next & (1 << toggled) != 0;
        for i in 0..n {
            if added {
                row_sums[i] += a[(i, toggled)];
            } else {
                row_sums[i] -= a[(i, toggled)];
            }
        }
        popcount += if added { 1 } else { -1 };
        gray = next;

        let mut prod = C64::new(1.0, 0.0);
        for s in &row_sums {
            prod *= *s;
        }
        if popcount % 2 == 0 {
            total += prod;
        } else {
            total -= prod;
        }
    }
    if n % 2 != 0 {
        total = -total;
    }
    Ok(total)
}

/// The n-mode Fourier interferometer: entries
/// `(1/sqrt(n)) exp(-2 pi i (j-1)(k-1) / n)`, certified unitary.
pub fn fourier_matrix(n: usize) -> ScatteringMatrix {
    assert!(n >= 1);
    let scale = 1.0 / (n as f64).sqrt();
    let u = DMatrix::from_fn(n, n, |j, k| {
        let angle = -TAU * (j as f64) * (k as f64) / (n as f64);
        C64::from_polar(scale, angle)
    });
    validate_unitary(u, 1e-10).expect("discrete Fourier transform is unitary")
}

/// Haar-distributed random unitary: complex Ginibre matrix, QR decomposition,
/// phases fixed so the R diagonal is positive. Deterministic per seed.
pub fn haar_random_unitary(n: usize, seed: u64) -> ScatteringMatrix {
    assert!(n >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    haar_from_rng(n, &mut rng)
}

fn haar_from_rng(n: usize, rng: &mut ChaCha8Rng) -> ScatteringMatrix {
    let g = DMatrix::from_fn(n, n, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        C64::new(re, im)
    });
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    // Multiply column j by the phase of r_jj: removes the sign/phase gauge so
    // the distribution is exactly Haar rather than QR-convention dependent.
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() == 0.0 { C64::new(1.0, 0.0) } else { d / d.norm() };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    validate_unitary(q, 1e-10).expect("orthonormalized matrix is unitary")
}

/// Full-cycle interference weight `|perm(conj(U) o U_sigma)|` where
/// `(U_sigma)[i][j] = U[i][sigma(j)]` and `o` is the elementwise product.
/// Equals the engine's `|u^dag Pi_sigma u|` for photons entering every port
/// of the n-mode interferometer with every output monitored.
pub fn conjecture_statistic(
    u: &ScatteringMatrix,
    sigma: &Permutation,
) -> Result<f64, VerifierError> {
    let n = u.m();
    if sigma.n() != n {
        return Err(VerifierError::SizeMismatch { matrix: n, perm: sigma.n() });
    }
    if !sigma.is_full_cycle() {
        return Err(VerifierError::NotFullCycle(n));
    }
    let b = DMatrix::from_fn(n, n, |i, j| {
        u.entry(i + 1, j + 1).conj() * u.entry(i + 1, sigma.apply(j + 1))
    });
    Ok(ryser_permanent(&b)?.norm())
}

/// Product-form permanent bound for an arbitrary square complex matrix:
/// `n! prod_i (sum_j |V[i][j]|^2 / n)^(1/2)`, i.e. `(n!/n^(n/2))` times the
/// product of row norms. Dominates `|perm(V)|`.
pub fn carlen_bound(v: &DMatrix<C64>) -> Result<f64, VerifierError> {
    let n = v.nrows();
    if v.ncols() != n || n == 0 {
        return Err(VerifierError::NonSquare { rows: n, cols: v.ncols() });
    }
    let factorial: f64 = (1..=n).map(|k| k as f64).product();
    let mut prod = 1.0f64;
    for i in 0..n {
        let row_sq: f64 = (0..n).map(|j| v[(i, j)].norm_sqr()).sum();
        prod *= row_sq / n as f64;
    }
    Ok(factorial * prod.sqrt())
}

/// Conjectured maximum n!/n^n of the full-cycle interference weight.
pub fn conjectured_bound(n: usize) -> f64 {
    let factorial: f64 = (1..=n).map(|k| k as f64).product();
    factorial / (n as f64).powi(n as i32)
}

/// A random draw whose statistic exceeded the conjectured bound. The matrix
/// is retained row-major as (re, im) pairs so the case can be reproduced.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ConjectureViolation {
    pub sample_index: usize,
    pub seed: u64,
    pub value: f64,
    pub excess: f64,
    pub entries: Vec<[f64; 2]>,
}

/// Evidence from one conjecture sweep at fixed n.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ConjectureSweepResult {
    pub n: usize,
    /// Conjectured maximum n!/n^n.
    pub bound: f64,
    /// Statistic of the n-mode Fourier matrix (should attain the bound).
    pub fourier_value: f64,
    /// Largest statistic among the Haar-random samples.
    pub max_random_value: f64,
    pub samples: usize,
    pub seed: u64,
    /// Samples exceeding the bound by more than 1e-12, never silently dropped.
    pub violations: Vec<ConjectureViolation>,
}

/// Evaluate the full-cycle statistic with sigma = (1, 2, ..., n) on the
/// Fourier matrix and on `samples` Haar-random unitaries. Sample seeds derive
/// deterministically from `seed`; evaluation parallelizes over samples with
/// an order-independent aggregation.
pub fn conjecture_sweep(
    n: usize,
    samples: usize,
    seed: u64,
) -> Result<ConjectureSweepResult, VerifierError> {
    if !(3..=7).contains(&n) {
        return Err(VerifierError::SweepSizeOutOfRange(n));
    }
    if samples == 0 {
        return Err(VerifierError::NoSamples);
    }
    let sigma = Permutation::from_cycle_sequence(n, &(1..=n).collect::<Vec<_>>())
        .expect("canonical full cycle is valid");
    let bound = conjectured_bound(n);
    let fourier_value = conjecture_statistic(&fourier_matrix(n), &sigma)?;

    let evaluated: Vec<(usize, u64, f64)> = (0..samples)
        .into_par_iter()
        .map(|k| {
            let sample_seed = seed ^ ((k as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15)).wrapping_add(k as u64);
            let u = haar_random_unitary(n, sample_seed);
            let value = conjecture_statistic(&u, &sigma).expect("sigma matches n");
            (k, sample_seed, value)
        })
        .collect();

    let mut max_random_value = 0.0f64;
    let mut violations = Vec::new();
    for (k, sample_seed, value) in evaluated {
        max_random_value = max_random_value.max(value);
        if value > bound + 1e-12 {
            let u = haar_random_unitary(n, sample_seed);
            let entries = u
                .matrix()
                .row_iter()
                .flat_map(|row| row.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>())
                .collect();
            violations.push(ConjectureViolation {
                sample_index: k,
                seed: sample_seed,
                value,
                excess: value - bound,
                entries,
            });
        }
    }

    Ok(ConjectureSweepResult {
        n,
        bound,
        fourier_value,
        max_random_value,
        samples,
        seed,
        violations,
    })
}
