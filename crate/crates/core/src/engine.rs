//! Exact multiphoton coincidence rates for an arbitrary interferometer,
//! input configuration, and Gram matrix, plus permanent-based oracles and a
//! seeded shot-noise sampler.
//!
//! The rate of a collision-free output configuration eta for input v is
//!
//! ```text
//! C = sum over permutation pairs (tau, tau') of the nonzero support of
//!     conj(u_tau) u_tau' prod_i G[tau'(i)][tau(i)],   u_tau = prod_i A[i][tau(i)],
//! ```
//!
//! where `A[i][j] = U[eta_i][v_j]` is the n x n submatrix linking occupied
//! inputs to monitored outputs. Grouping pairs by sigma = tau' tau^{-1} shows
//! this is the permutation expansion `sum_sigma r_sigma (u^dag Pi_sigma u)`:
//! each overlap product r_sigma weighs one interference class. Only
//! permutations whose every matrix element is nonzero contribute, so sparse
//! interferometers prune the n! sum to a handful of terms.

use crate::photon::GramMatrix;
use crate::util::{combinations_lex, KahanC};
use crate::verifier;
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

/// Matrix entries smaller than this in magnitude are treated as structural
/// zeros when enumerating contributing permutations.
pub const SUPPORT_THRESHOLD: f64 = 1e-14;

/// Largest imaginary residual tolerated in an accumulated rate.
pub const IMAGINARY_TOL: f64 = 1e-10;

/// Most negative pre-clamp rate tolerated before flagging a fault.
pub const NEGATIVE_TOL: f64 = -1e-10;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("matrix is {rows}x{cols}, expected square")]
    NonSquare { rows: usize, cols: usize },
    #[error("unitarity defect {defect:.3e} exceeds tolerance {tol:.1e} at entry ({row},{col})")]
    NotUnitary { defect: f64, tol: f64, row: usize, col: usize },
    #[error("input configuration must contain at least one port")]
    EmptyConfig,
    #[error("port {port} out of range [1..{m}]")]
    PortOutOfRange { port: usize, m: usize },
    #[error("port {0} listed twice in a configuration")]
    DuplicatePort(usize),
    #[error("photon count {photons} does not match gram size {gram}")]
    GramSizeMismatch { photons: usize, gram: usize },
    #[error("input has {inputs} ports but output has {outputs}")]
    LengthMismatch { inputs: usize, outputs: usize },
    #[error("overlap matrix is {rows}x{cols}, expected {n}x{n}")]
    OverlapShape { rows: usize, cols: usize, n: usize },
    #[error("imaginary residual {residual:.3e} exceeds {tol:.1e}: numerical or logic fault")]
    ImaginaryResidual { residual: f64, tol: f64 },
    #[error("rate {value:.3e} is negative beyond tolerance: numerical or logic fault")]
    NegativeRate { value: f64 },
    #[error("photon count {n} exceeds the enumeration cap {cap}")]
    CapExceeded { n: usize, cap: usize },
    #[error("rates sum to {sum} > 1: normalization fault")]
    NormalizationFault { sum: f64 },
    #[error("sampling requires shots >= 1")]
    NoShots,
}

// ---------------------------------------------------------------------------
// Scattering matrices
// ---------------------------------------------------------------------------

/// Unitary mode transformation of an m-port interferometer, certified at
/// construction: max entry of |U^dag U - I| at most the admission tolerance.
#[derive(Clone, Debug, PartialEq)]
pub struct ScatteringMatrix {
    m: usize,
    u: DMatrix<C64>,
}

impl ScatteringMatrix {
    pub const UNITARITY_TOL: f64 = 1e-10;

    /// Certify at the default tolerance.
    pub fn new(u: DMatrix<C64>) -> Result<Self, EngineError> {
        validate_unitary(u, Self::UNITARITY_TOL)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Amplitude from input port `j` to output port `k`, 1-based.
    pub fn entry(&self, k: usize, j: usize) -> C64 {
        self.u[(k - 1, j - 1)]
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.u
    }

    /// Max entry of |U^dag U - I| for this matrix.
    pub fn defect(&self) -> f64 {
        unitarity_defect(&self.u)
    }
}

/// Max-entry deviation of `U^dag U` from the identity.
pub fn unitarity_defect(u: &DMatrix<C64>) -> f64 {
    let gram = u.adjoint() * u;
    let n = gram.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
            worst = worst.max((gram[(i, j)] - target).norm());
        }
    }
    worst
}

/// Certify a candidate matrix as unitary within `tol`, reporting the worst
/// entry of `U^dag U - I` on failure.
pub fn validate_unitary(u: DMatrix<C64>, tol: f64) -> Result<ScatteringMatrix, EngineError> {
    let (rows, cols) = (u.nrows(), u.ncols());
    if rows != cols || rows == 0 {
        return Err(EngineError::NonSquare { rows, cols });
    }
    let gram = u.adjoint() * &u;
    let mut worst = 0.0f64;
    let mut at = (0usize, 0usize);
    for i in 0..rows {
        for j in 0..rows {
            let target = if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
            let dev = (gram[(i, j)] - target).norm();
            if dev > worst {
                worst = dev;
                at = (i + 1, j + 1);
            }
        }
    }
    if worst > tol {
        return Err(EngineError::NotUnitary { defect: worst, tol, row: at.0, col: at.1 });
    }
    Ok(ScatteringMatrix { m: rows, u })
}

// ---------------------------------------------------------------------------
// Configurations
// ---------------------------------------------------------------------------

/// Which input port each photon enters: photon `i` (1-based) enters port
/// `ports[i-1]`. Ports are pairwise distinct (at most one photon per port).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct InputConfig {
    ports: Vec<usize>,
}

impl InputConfig {
    pub fn new(ports: Vec<usize>) -> Result<Self, EngineError> {
        if ports.is_empty() {
            return Err(EngineError::EmptyConfig);
        }
        let mut sorted = ports.clone();
        sorted.sort_unstable();
        for w in sorted.windows(2) {
            if w[0] == w[1] {
                return Err(EngineError::DuplicatePort(w[0]));
            }
        }
        if sorted[0] < 1 {
            return Err(EngineError::PortOutOfRange { port: sorted[0], m: usize::MAX });
        }
        Ok(Self { ports })
    }

    pub fn n(&self) -> usize {
        self.ports.len()
    }

    /// Input port of photon `i`, 1-based.
    pub fn port_of(&self, i: usize) -> usize {
        self.ports[i - 1]
    }

    pub fn ports(&self) -> &[usize] {
        &self.ports
    }
}

impl fmt::Display for InputConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_ports(f, &self.ports)
    }
}

/// Collision-free set of monitored output ports, stored strictly increasing.
/// Any ordering is accepted at construction; physically equivalent orderings
/// canonicalize to the same value.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OutputConfig {
    ports: Vec<usize>,
}

impl OutputConfig {
    pub fn new(ports: Vec<usize>) -> Result<Self, EngineError> {
        if ports.is_empty() {
            return Err(EngineError::EmptyConfig);
        }
        let mut sorted = ports;
        sorted.sort_unstable();
        for w in sorted.windows(2) {
            if w[0] == w[1] {
                return Err(EngineError::DuplicatePort(w[0]));
            }
        }
        if sorted[0] < 1 {
            return Err(EngineError::PortOutOfRange { port: sorted[0], m: usize::MAX });
        }
        Ok(Self { ports: sorted })
    }

    pub fn n(&self) -> usize {
        self.ports.len()
    }

    /// Monitored port in slot `i` of the canonical (increasing) order.
    pub fn port(&self, i: usize) -> usize {
        self.ports[i - 1]
    }

    pub fn ports(&self) -> &[usize] {
        &self.ports
    }

    /// Sum of port labels; its parity splits phase-bearing configurations
    /// into classes with opposite phase dependence.
    pub fn port_sum(&self) -> usize {
        self.ports.iter().sum()
    }
}

impl fmt::Display for OutputConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_ports(f, &self.ports)
    }
}

fn write_ports(f: &mut fmt::Formatter<'_>, ports: &[usize]) -> fmt::Result {
    for (i, p) in ports.iter().enumerate() {
        if i > 0 {
            write!(f, ",")?;
        }
        write!(f, "{p}")?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

/// Rate of one output configuration together with the imaginary residual of
/// its accumulated sum (a numerical health indicator, not physics). Reports
/// derived from sampled counts carry a binomial standard error per entry.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateEntry {
    pub rate: f64,
    pub im_residual: f64,
    pub stderr: Option<f64>,
}

impl RateEntry {
    pub fn exact(rate: f64, im_residual: f64) -> Self {
        RateEntry { rate, im_residual, stderr: None }
    }
}

/// Exact or empirical rates over collision-free output configurations.
/// `discard_mass` absorbs everything else (collision outcomes); for exact
/// reports the rates and discard sum to 1 within accumulation error.
#[derive(Clone, Debug, PartialEq)]
pub struct CoincidenceReport {
    pub rates: BTreeMap<OutputConfig, RateEntry>,
    pub discard_mass: f64,
    /// Present when the rates are empirical frequencies from sampled counts.
    pub total_shots: Option<u64>,
}

impl CoincidenceReport {
    pub fn rate_of(&self, eta: &OutputConfig) -> f64 {
        self.rates.get(eta).map_or(0.0, |e| e.rate)
    }

    pub fn total_rate(&self) -> f64 {
        self.rates.values().map(|e| e.rate).sum()
    }
}

/// Integer shot counts per output configuration from one sampling run.
/// Counts plus discard always sum to `shots` exactly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountsReport {
    pub shots: u64,
    pub seed: u64,
    pub counts: BTreeMap<OutputConfig, u64>,
    pub discard: u64,
}

// ---------------------------------------------------------------------------
// Rate computation
// ---------------------------------------------------------------------------

/// Enumerate, in lexicographic order, every permutation `tau` (0-based image
/// tables) with `|a[i][tau[i]]| > SUPPORT_THRESHOLD` for all rows `i`.
fn support_permutations(a: &DMatrix<C64>) -> Vec<Vec<usize>> {
    let n = a.nrows();
    let mut candidates: Vec<Vec<usize>> = Vec::with_capacity(n);
    for i in 0..n {
        let cols: Vec<usize> =
            (0..n).filter(|&j| a[(i, j)].norm() > SUPPORT_THRESHOLD).collect();
        if cols.is_empty() {
            return Vec::new();
        }
        candidates.push(cols);
    }
    let mut out = Vec::new();
    let mut current = vec![0usize; n];
    let mut used = vec![false; n];
    fn rec(
        row: usize,
        n: usize,
        candidates: &[Vec<usize>],
        used: &mut [bool],
        current: &mut [usize],
        out: &mut Vec<Vec<usize>>,
    ) {
        if row == n {
            out.push(current.to_vec());
            return;
        }
        for &j in &candidates[row] {
            if !used[j] {
                used[j] = true;
                current[row] = j;
                rec(row + 1, n, candidates, used, current, out);
                used[j] = false;
            }
        }
    }
    rec(0, n, &candidates, &mut used, &mut current, &mut out);
    out
}

/// Raw complex accumulated rate for submatrix `a` (slots x photons) and
/// photon-overlap matrix `g` (0-based, `g[(b, c)] = <p_{b+1}, p_{c+1}>`).
fn raw_rate(a: &DMatrix<C64>, g: &DMatrix<C64>) -> C64 {
    let n = a.nrows();
    let support = support_permutations(a);
    let amps: Vec<C64> = support
        .iter()
        .map(|tau| {
            let mut u = C64::new(1.0, 0.0);
            for i in 0..n {
                u *= a[(i, tau[i])];
            }
            u
        })
        .collect();
    let mut acc = KahanC::new();
    for (t, tau) in support.iter().enumerate() {
        for (s, tau2) in support.iter().enumerate() {
            let mut overlap = C64::new(1.0, 0.0);
            for i in 0..n {
                overlap *= g[(tau2[i], tau[i])];
            }
            acc.add(amps[t].conj() * amps[s] * overlap);
        }
    }
    acc.value()
}

fn build_submatrix(
    u: &ScatteringMatrix,
    v: &InputConfig,
    eta: &OutputConfig,
) -> Result<DMatrix<C64>, EngineError> {
    let n = v.n();
    if eta.n() != n {
        return Err(EngineError::LengthMismatch { inputs: n, outputs: eta.n() });
    }
    let m = u.m();
    for &p in v.ports() {
        if p > m {
            return Err(EngineError::PortOutOfRange { port: p, m });
        }
    }
    for &p in eta.ports() {
        if p > m {
            return Err(EngineError::PortOutOfRange { port: p, m });
        }
    }
    Ok(DMatrix::from_fn(n, n, |i, j| u.entry(eta.port(i + 1), v.port_of(j + 1))))
}

fn rate_entry(
    u: &ScatteringMatrix,
    g: &GramMatrix,
    v: &InputConfig,
    eta: &OutputConfig,
) -> Result<RateEntry, EngineError> {
    if g.n() != v.n() {
        return Err(EngineError::GramSizeMismatch { photons: v.n(), gram: g.n() });
    }
    let a = build_submatrix(u, v, eta)?;
    let c = raw_rate(&a, g.matrix());
    if c.im.abs() > IMAGINARY_TOL {
        return Err(EngineError::ImaginaryResidual { residual: c.im.abs(), tol: IMAGINARY_TOL });
    }
    if c.re < NEGATIVE_TOL {
        return Err(EngineError::NegativeRate { value: c.re });
    }
    Ok(RateEntry::exact(c.re.max(0.0), c.im.abs()))
}

/// [`coincidence_rate`] keeping the imaginary residual alongside the rate.
pub fn rate_detail(
    u: &ScatteringMatrix,
    g: &GramMatrix,
    v: &InputConfig,
    eta: &OutputConfig,
) -> Result<RateEntry, EngineError> {
    rate_entry(u, g, v, eta)
}

/// Exact coincidence rate of output configuration `eta` for photons entering
/// at `v` with pairwise overlaps `g`. The accumulated sum must be real within
/// `IMAGINARY_TOL` and nonnegative within `NEGATIVE_TOL`; tiny negatives
/// clamp to 0.
pub fn coincidence_rate(
    u: &ScatteringMatrix,
    g: &GramMatrix,
    v: &InputConfig,
    eta: &OutputConfig,
) -> Result<f64, EngineError> {
    rate_entry(u, g, v, eta).map(|e| e.rate)
}

/// Probe variant of the rate accumulation: `overlaps` stands in for the Gram
/// matrix without any physicality checks, and the raw complex sum is returned
/// unclamped. Substituting the matrix of a permutation `sigma` (1 at
/// `(sigma(b), b)`) isolates that permutation's interference weight
/// `u^dag Pi_sigma u`; unit-modulus cyclic overlaps realize prescribed
/// collective phases exactly.
pub fn rate_from_overlaps(
    u: &ScatteringMatrix,
    overlaps: &DMatrix<C64>,
    v: &InputConfig,
    eta: &OutputConfig,
) -> Result<C64, EngineError> {
    let n = v.n();
    if overlaps.nrows() != n || overlaps.ncols() != n {
        return Err(EngineError::OverlapShape {
            rows: overlaps.nrows(),
            cols: overlaps.ncols(),
            n,
        });
    }
    let a = build_submatrix(u, v, eta)?;
    Ok(raw_rate(&a, overlaps))
}

/// Default photon-count cap for full output enumeration.
pub const DEFAULT_ENUMERATION_CAP: usize = 8;

/// Rates of every collision-free output configuration (cap `DEFAULT_ENUMERATION_CAP`).
pub fn all_rates(
    u: &ScatteringMatrix,
    g: &GramMatrix,
    v: &InputConfig,
) -> Result<CoincidenceReport, EngineError> {
    all_rates_with_cap(u, g, v, DEFAULT_ENUMERATION_CAP)
}

/// Rates of every collision-free output configuration, enumerated in
/// lexicographic order and evaluated in parallel. `discard_mass` is the
/// leftover probability of collision outcomes. Deterministic for any thread
/// count: per-configuration values are pure and the total reduction is
/// ordered.
pub fn all_rates_with_cap(
    u: &ScatteringMatrix,
    g: &GramMatrix,
    v: &InputConfig,
    cap: usize,
) -> Result<CoincidenceReport, EngineError> {
    let n = v.n();
    if n > cap {
        return Err(EngineError::CapExceeded { n, cap });
    }
    if g.n() != n {
        return Err(EngineError::GramSizeMismatch { photons: n, gram: g.n() });
    }
    let m = u.m();
    for &p in v.ports() {
        if p > m {
            return Err(EngineError::PortOutOfRange { port: p, m });
        }
    }
    let configs = combinations_lex(m, n);
    let entries: Vec<Result<(OutputConfig, RateEntry), EngineError>> = configs
        .into_par_iter()
        .map(|ports| {
            let eta = OutputConfig::new(ports).expect("enumerated ports are valid");
            let entry = rate_entry(u, g, v, &eta)?;
            Ok((eta, entry))
        })
        .collect();

    let mut rates = BTreeMap::new();
    let mut total = crate::util::KahanF::new();
    for item in entries {
        let (eta, entry) = item?;
        total.add(entry.rate);
        rates.insert(eta, entry);
    }
    let sum = total.value();
    if sum > 1.0 + 1e-9 {
        return Err(EngineError::NormalizationFault { sum });
    }
    Ok(CoincidenceReport { rates, discard_mass: (1.0 - sum).max(0.0), total_shots: None })
}

/// Rate an ideal interferometer would give identical photons: the squared
/// permanent magnitude of the occupied submatrix. Independent cross-check for
/// `coincidence_rate` with an all-ones Gram matrix.
pub fn indistinguishable_oracle(
    u: &ScatteringMatrix,
    v: &InputConfig,
    eta: &OutputConfig,
) -> Result<f64, EngineError> {
    let a = build_submatrix(u, v, eta)?;
    let p = verifier::ryser_permanent(&a).expect("submatrix is square");
    Ok(p.norm_sqr())
}

/// Rate for fully distinguishable photons: the permanent of the elementwise
/// squared magnitudes. Independent cross-check for an identity Gram matrix.
pub fn distinguishable_oracle(
    u: &ScatteringMatrix,
    v: &InputConfig,
    eta: &OutputConfig,
) -> Result<f64, EngineError> {
    let a = build_submatrix(u, v, eta)?;
    let probs = DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| {
        C64::new(a[(i, j)].norm_sqr(), 0.0)
    });
    let p = verifier::ryser_permanent(&probs).expect("submatrix is square");
    Ok(p.re)
}

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

/// Draw multinomial shot counts from an exact report, deterministically per
/// seed. Bins are visited in configuration order with conditional binomial
/// splitting, so counts plus discard equal `shots` exactly.
pub fn sample_counts(
    report: &CoincidenceReport,
    shots: u64,
    seed: u64,
) -> Result<CountsReport, EngineError> {
    if shots == 0 {
        return Err(EngineError::NoShots);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = BTreeMap::new();
    let mut remaining_shots = shots;
    let mut remaining_mass = report.total_rate() + report.discard_mass;
    for (eta, entry) in &report.rates {
        if remaining_shots == 0 {
            counts.insert(eta.clone(), 0);
            continue;
        }
        let p = if remaining_mass <= 0.0 {
            0.0
        } else {
            (entry.rate / remaining_mass).clamp(0.0, 1.0)
        };
        let draw = if p >= 1.0 {
            remaining_shots
        } else if p <= 0.0 {
            0
        } else {
            Binomial::new(remaining_shots, p)
                .expect("probability clamped to [0,1]")
                .sample(&mut rng)
        };
        counts.insert(eta.clone(), draw);
        remaining_shots -= draw;
        remaining_mass -= entry.rate;
    }
    Ok(CountsReport { shots, seed, counts, discard: remaining_shots })
}
