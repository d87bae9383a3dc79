//! Photon internal states, Gram matrices of pairwise overlaps, and the
//! permutation machinery their interference terms are indexed by.
//!
//! The Gram matrix is the sole carrier of distinguishability data: every
//! coincidence rate depends on the photons' internal states only through the
//! pairwise overlaps `G[a][b] = <p_a, p_b>` (conjugate-linear in the first
//! argument). Permutation overlap products `r_sigma` and the collective phase
//! of a cycle are derived here and consumed by the engine and estimator.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::f64::consts::{PI, TAU};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PhotonError {
    #[error("internal state must have dimension >= 1")]
    EmptyState,
    #[error("internal state norm is {0}, expected 1 within 1e-12")]
    NotNormalized(f64),
    #[error("cannot normalize a zero vector")]
    ZeroVector,
    #[error("state list is empty")]
    NoStates,
    #[error("state dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("gram matrix rejected: {0}")]
    InvalidGram(String),
    #[error("permutation images are not a bijection on [1..{0}]")]
    NotBijective(usize),
    #[error("index {index} out of range [1..{n}]")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("cycle contains repeated or out-of-range labels")]
    MalformedCycle,
    #[error("cycle must have length >= 3")]
    CycleTooShort,
    #[error("zero overlap along cycle edge ({0},{1}): phase undefined")]
    ZeroOverlap(usize, usize),
    #[error("size mismatch: gram is {gram}x{gram}, permutation acts on [1..{perm}]")]
    SizeMismatch { gram: usize, perm: usize },
    #[error("cycle overlap magnitude {val} at edge {edge} exceeds 1/2")]
    OverlapTooLarge { edge: usize, val: f64 },
}

/// Reduce an angle to the interval (-pi, pi].
pub(crate) fn wrap_angle(x: f64) -> f64 {
    let mut w = x.rem_euclid(TAU);
    if w > PI {
        w -= TAU;
    }
    w
}

// ---------------------------------------------------------------------------
// Internal states
// ---------------------------------------------------------------------------

/// Unit vector over an internal degree of freedom (time bin, polarization, ...).
#[derive(Clone, Debug, PartialEq)]
pub struct InternalState {
    coeffs: DVector<C64>,
}

impl InternalState {
    pub const NORM_TOL: f64 = 1e-12;

    /// Wrap an already normalized coefficient vector.
    pub fn new(coeffs: Vec<C64>) -> Result<Self, PhotonError> {
        if coeffs.is_empty() {
            return Err(PhotonError::EmptyState);
        }
        let v = DVector::from_vec(coeffs);
        let norm = v.norm();
        if (norm - 1.0).abs() > Self::NORM_TOL {
            return Err(PhotonError::NotNormalized(norm));
        }
        Ok(Self { coeffs: v })
    }

    /// Normalize an arbitrary nonzero coefficient vector.
    pub fn normalized(coeffs: Vec<C64>) -> Result<Self, PhotonError> {
        if coeffs.is_empty() {
            return Err(PhotonError::EmptyState);
        }
        let v = DVector::from_vec(coeffs);
        let norm = v.norm();
        if norm == 0.0 {
            return Err(PhotonError::ZeroVector);
        }
        Ok(Self { coeffs: v / C64::new(norm, 0.0) })
    }

    /// The `k`-th (1-based) computational basis state in dimension `d`.
    pub fn basis(d: usize, k: usize) -> Self {
        assert!(k >= 1 && k <= d, "basis index out of range");
        let mut v = DVector::from_element(d, C64::new(0.0, 0.0));
        v[k - 1] = C64::new(1.0, 0.0);
        Self { coeffs: v }
    }

    /// A Haar-style random state: normalized complex Gaussian vector.
    pub fn random<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Self {
        assert!(d >= 1);
        let v = DVector::from_fn(d, |_, _| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            C64::new(re, im)
        });
        let norm = v.norm();
        Self { coeffs: v / C64::new(norm, 0.0) }
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &DVector<C64> {
        &self.coeffs
    }

    /// Inner product `<self, other>`, conjugate-linear in `self`.
    pub fn inner(&self, other: &Self) -> C64 {
        self.coeffs.dotc(&other.coeffs)
    }
}

// ---------------------------------------------------------------------------
// Gram matrices
// ---------------------------------------------------------------------------

/// Outcome of checking a candidate Gram matrix. `violations` is empty iff the
/// matrix is Hermitian, unit-diagonal, entrywise bounded, and PSD within the
/// requested tolerance.
#[derive(Clone, Debug)]
pub struct GramCheck {
    pub ok: bool,
    pub violations: Vec<String>,
    pub max_hermitian_dev: f64,
    pub max_diag_dev: f64,
    pub max_entry_excess: f64,
    pub min_eigenvalue: f64,
}

fn check_gram_scales(
    g: &DMatrix<C64>,
    hermitian_tol: f64,
    diag_tol: f64,
    entry_tol: f64,
    eig_floor: f64,
) -> GramCheck {
    let mut violations = Vec::new();
    let n = g.nrows();
    if n == 0 || g.ncols() != n {
        return GramCheck {
            ok: false,
            violations: vec![format!("matrix is {}x{}, expected square nonempty", n, g.ncols())],
            max_hermitian_dev: f64::NAN,
            max_diag_dev: f64::NAN,
            max_entry_excess: f64::NAN,
            min_eigenvalue: f64::NAN,
        };
    }

    let mut max_herm = 0.0f64;
    let mut max_diag = 0.0f64;
    let mut max_entry = 0.0f64;
    for a in 0..n {
        max_diag = max_diag.max((g[(a, a)] - C64::new(1.0, 0.0)).norm());
        for b in 0..n {
            max_herm = max_herm.max((g[(a, b)] - g[(b, a)].conj()).norm());
            max_entry = max_entry.max(g[(a, b)].norm() - 1.0);
        }
    }
    if max_herm > hermitian_tol {
        violations.push(format!("not Hermitian: max |G - G^dag| = {max_herm:.3e}"));
    }
    if max_diag > diag_tol {
        violations.push(format!("diagonal not unit: max |G_aa - 1| = {max_diag:.3e}"));
    }
    if max_entry > entry_tol {
        violations.push(format!("overlap magnitude exceeds 1 by {max_entry:.3e}"));
    }

    // Eigenvalues of the Hermitian part; symmetrizing first keeps the solver
    // honest when the Hermiticity check itself failed.
    let h = (g + g.adjoint()).scale(0.5);
    let eig = nalgebra::SymmetricEigen::new(h);
    let min_eig = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    if min_eig < eig_floor {
        violations.push(format!("not PSD: min eigenvalue = {min_eig:.3e}"));
    }

    GramCheck {
        ok: violations.is_empty(),
        violations,
        max_hermitian_dev: max_herm,
        max_diag_dev: max_diag,
        max_entry_excess: max_entry,
        min_eigenvalue: min_eig,
    }
}

/// Check a candidate Gram matrix at a uniform tolerance: Hermitian, unit
/// diagonal, and overlap magnitudes within `tol`; PSD with eigenvalue floor
/// `-tol`. The returned diagnostics name each violated property.
pub fn validate_gram(g: &DMatrix<C64>, tol: f64) -> GramCheck {
    check_gram_scales(g, tol, tol, tol, -tol)
}

/// Hermitian, unit-diagonal, positive-semidefinite matrix of pairwise state
/// overlaps. Entry `(a, b)` is `<p_a, p_b>` for photons `a`, `b` (1-based).
#[derive(Clone, Debug, PartialEq)]
pub struct GramMatrix {
    n: usize,
    g: DMatrix<C64>,
}

impl GramMatrix {
    pub const HERMITIAN_TOL: f64 = 1e-12;
    pub const EIGENVALUE_FLOOR: f64 = -1e-10;

    /// Validate and wrap a candidate matrix.
    pub fn from_matrix(g: DMatrix<C64>) -> Result<Self, PhotonError> {
        let check = check_gram_scales(
            &g,
            Self::HERMITIAN_TOL,
            Self::HERMITIAN_TOL,
            Self::HERMITIAN_TOL,
            Self::EIGENVALUE_FLOOR,
        );
        if !check.ok {
            return Err(PhotonError::InvalidGram(check.violations.join("; ")));
        }
        Ok(Self { n: g.nrows(), g })
    }

    /// Fully distinguishable photons: the identity matrix.
    pub fn identity(n: usize) -> Self {
        Self { n, g: DMatrix::identity(n, n) }
    }

    /// Identical photons: the all-ones matrix.
    pub fn all_ones(n: usize) -> Self {
        Self { n, g: DMatrix::from_element(n, n, C64::new(1.0, 0.0)) }
    }

    /// Gram matrix of explicit states; PSD by construction.
    pub fn from_states(states: &[InternalState]) -> Result<Self, PhotonError> {
        gram_from_states(states)
    }

    /// Gram matrix of `n` random states in dimension `d`, deterministically
    /// seeded. Useful for randomized checks; PSD by construction.
    pub fn random(n: usize, d: usize, seed: u64) -> Self {
        use rand::SeedableRng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let states: Vec<InternalState> =
            (0..n).map(|_| InternalState::random(d, &mut rng)).collect();
        gram_from_states(&states).expect("random states always give a valid gram")
    }

    /// Build states realizing prescribed overlaps around a photon cycle:
    /// `G[cycle[j]][cycle[j+1]] = overlaps[j]` (wrapping), all other
    /// off-diagonal overlaps zero. Requires `|overlaps[j]| <= 1/2`; the states
    /// live in dimension `2n`, so the result is PSD by construction.
    pub fn from_cycle_overlaps(
        n: usize,
        cycle: &[usize],
        overlaps: &[C64],
    ) -> Result<Self, PhotonError> {
        if cycle.len() != n || overlaps.len() != n || n < 3 {
            return Err(PhotonError::MalformedCycle);
        }
        check_cycle_labels(cycle, n)?;
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let d = 2 * n;
        let mut states: Vec<Option<InternalState>> = vec![None; n];
        for (j, &label) in cycle.iter().enumerate() {
            let o = overlaps[j];
            if o.norm() > 0.5 + 1e-12 {
                return Err(PhotonError::OverlapTooLarge { edge: j + 1, val: o.norm() });
            }
            // State of photon cycle[j]: weight s on the shared vector f_j,
            // bridge b_j = conj(o_j)/s on f_{j+1}, remainder on a private
            // vector h_j so the state normalizes exactly.
            let b = o.conj() / s;
            let rest = (1.0 - s * s - b.norm_sqr()).max(0.0).sqrt();
            let mut v = vec![C64::new(0.0, 0.0); d];
            v[j] = C64::new(s, 0.0);
            v[(j + 1) % n] = b;
            v[n + j] = C64::new(rest, 0.0);
            states[label - 1] = Some(InternalState::normalized(v)?);
        }
        let states: Vec<InternalState> = states.into_iter().map(|s| s.unwrap()).collect();
        gram_from_states(&states)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Overlap `<p_a, p_b>` with 1-based photon labels.
    pub fn overlap(&self, a: usize, b: usize) -> C64 {
        self.g[(a - 1, b - 1)]
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.g
    }
}

/// Gram matrix of a list of states: `G[a][b] = <p_a, p_b>`.
pub fn gram_from_states(states: &[InternalState]) -> Result<GramMatrix, PhotonError> {
    if states.is_empty() {
        return Err(PhotonError::NoStates);
    }
    let d = states[0].dim();
    for s in states {
        if s.dim() != d {
            return Err(PhotonError::DimensionMismatch { expected: d, got: s.dim() });
        }
    }
    let n = states.len();
    let g = DMatrix::from_fn(n, n, |a, b| states[a].inner(&states[b]));
    // Construction guarantees PSD up to rounding; certify anyway.
    GramMatrix::from_matrix(g)
}

// ---------------------------------------------------------------------------
// Permutations
// ---------------------------------------------------------------------------

/// Permutation of `[1..n]` stored as an image table together with its
/// decomposition into disjoint cycles (each cycle starts at its smallest
/// label; cycles sorted by first label; fixed points listed as 1-cycles).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Permutation {
    images: Vec<usize>,
    cycles: Vec<Vec<usize>>,
}

impl Permutation {
    /// Build from an image table: `images[i-1]` is the image of `i`.
    pub fn from_images(images: Vec<usize>) -> Result<Self, PhotonError> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &x in &images {
            if x < 1 || x > n || seen[x - 1] {
                return Err(PhotonError::NotBijective(n));
            }
            seen[x - 1] = true;
        }
        let cycles = decompose(&images);
        Ok(Self { images, cycles })
    }

    pub fn identity(n: usize) -> Self {
        Self::from_images((1..=n).collect()).expect("identity is a bijection")
    }

    pub fn transposition(n: usize, a: usize, b: usize) -> Result<Self, PhotonError> {
        if a < 1 || a > n {
            return Err(PhotonError::IndexOutOfRange { index: a, n });
        }
        if b < 1 || b > n || a == b {
            return Err(PhotonError::IndexOutOfRange { index: b, n });
        }
        let mut images: Vec<usize> = (1..=n).collect();
        images.swap(a - 1, b - 1);
        Self::from_images(images)
    }

    /// Build the permutation whose orbit follows `cycle`: each label maps to
    /// the next one in the sequence, the last wraps to the first; labels not
    /// mentioned are fixed.
    pub fn from_cycle_sequence(n: usize, cycle: &[usize]) -> Result<Self, PhotonError> {
        check_cycle_labels(cycle, n)?;
        let mut images: Vec<usize> = (1..=n).collect();
        for (j, &c) in cycle.iter().enumerate() {
            images[c - 1] = cycle[(j + 1) % cycle.len()];
        }
        Self::from_images(images)
    }

    pub fn n(&self) -> usize {
        self.images.len()
    }

    /// Image of `i` (1-based).
    pub fn apply(&self, i: usize) -> usize {
        self.images[i - 1]
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    /// Disjoint-cycle decomposition in canonical form.
    pub fn cycles(&self) -> &[Vec<usize>] {
        &self.cycles
    }

    pub fn inverse(&self) -> Self {
        let n = self.n();
        let mut images = vec![0usize; n];
        for i in 1..=n {
            images[self.apply(i) - 1] = i;
        }
        Self::from_images(images).expect("inverse of a bijection is a bijection")
    }

    /// Composition `self . other`: apply `other` first, then `self`.
    pub fn compose(&self, other: &Self) -> Self {
        assert_eq!(self.n(), other.n(), "composition requires equal sizes");
        let images = (1..=self.n()).map(|i| self.apply(other.apply(i))).collect();
        Self::from_images(images).expect("composition of bijections is a bijection")
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &x)| x == i + 1)
    }

    /// True iff the permutation is a single cycle through all `n` labels.
    pub fn is_full_cycle(&self) -> bool {
        self.cycles.len() == 1 && self.cycles[0].len() == self.n() && self.n() >= 2
    }
}

fn check_cycle_labels(cycle: &[usize], n: usize) -> Result<(), PhotonError> {
    let mut seen = vec![false; n];
    for &c in cycle {
        if c < 1 || c > n || seen[c - 1] {
            return Err(PhotonError::MalformedCycle);
        }
        seen[c - 1] = true;
    }
    Ok(())
}

fn decompose(images: &[usize]) -> Vec<Vec<usize>> {
    let n = images.len();
    let mut visited = vec![false; n];
    let mut cycles = Vec::new();
    for start in 1..=n {
        if visited[start - 1] {
            continue;
        }
        let mut cycle = vec![start];
        visited[start - 1] = true;
        let mut cur = images[start - 1];
        while cur != start {
            visited[cur - 1] = true;
            cycle.push(cur);
            cur = images[cur - 1];
        }
        cycles.push(cycle);
    }
    cycles
}

// ---------------------------------------------------------------------------
// Overlap products
// ---------------------------------------------------------------------------

/// Disjoint-cycle decomposition of a permutation in canonical form: each
/// cycle starts at its smallest label, cycles sorted by first label, fixed
/// points included as 1-cycles.
pub fn cycle_decompose(perm: &Permutation) -> Vec<Vec<usize>> {
    perm.cycles().to_vec()
}

/// Permutation overlap product `r_sigma = prod_i G[sigma(i)][i]`.
///
/// `r` is 1 for the identity, real in `[0, 1]` for transpositions, factorizes
/// over disjoint cycles, and conjugates under inversion of `sigma`.
pub fn overlap_r(g: &GramMatrix, sigma: &Permutation) -> Result<C64, PhotonError> {
    if g.n() != sigma.n() {
        return Err(PhotonError::SizeMismatch { gram: g.n(), perm: sigma.n() });
    }
    let mut r = C64::new(1.0, 0.0);
    for i in 1..=g.n() {
        r *= g.overlap(sigma.apply(i), i);
    }
    Ok(r)
}

/// Collective phase accumulated around a photon cycle: the sum of pairwise
/// overlap arguments `arg G[c_j][c_{j+1}]` (wrapping), reduced to (-pi, pi].
///
/// Invariant under cyclic rotation of the sequence; negates under reversal.
pub fn collective_phase_of_cycle(g: &GramMatrix, cycle: &[usize]) -> Result<f64, PhotonError> {
    if cycle.len() < 3 {
        return Err(PhotonError::CycleTooShort);
    }
    check_cycle_labels(cycle, g.n())?;
    let k = cycle.len();
    let mut sum = 0.0;
    for j in 0..k {
        let a = cycle[j];
        let b = cycle[(j + 1) % k];
        let o = g.overlap(a, b);
        if o.norm() == 0.0 {
            return Err(PhotonError::ZeroOverlap(a, b));
        }
        sum += o.arg();
    }
    Ok(wrap_angle(sum))
}
