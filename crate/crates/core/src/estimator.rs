//! Recovery of pairwise overlaps, the n-photon overlap amplitude, and the
//! collective phase from exact rates or sampled counts of a sparse design,
//! plus the trace-out audit that certifies the interference is genuinely
//! n-photon: summing any shared-output pair out of the phase-bearing rates
//! leaves a flat marginal.
//!
//! Inversion formulas, with s = 1/2^(2n-1) the common rate scale:
//!   pairwise   r_ab  = 1 - (2^(n+1)/(n-1)) * sum of rates over chi_{a,b}
//!   amplitude  |r|   = sqrt(prod of the n pairwise values)
//!   phase      psi   = arccos((-1)^n 2^(n-1) (even - odd xi sums) / |r|)
//! The sign of psi is not observable; reports carry |psi| in [0, pi] and
//! both candidates.

use crate::classifier::{ConfigClassification, OSets, Parity};
use crate::engine::{CoincidenceReport, CountsReport, OutputConfig, RateEntry};
use std::collections::BTreeMap;
use thiserror::Error;

/// Below this n-photon overlap amplitude a sampled phase is noise-dominated.
pub const AMPLITUDE_THRESHOLD: f64 = 1e-6;
/// Refusal floor for exact rates, where no shot noise enters the division;
/// only catastrophic amplification of float residue is guarded against.
pub const EXACT_AMPLITUDE_FLOOR: f64 = 1e-9;
/// Allowed excursion of exact-rate pairwise estimates outside [0, 1].
pub const EXACT_RANGE_TOL: f64 = 1e-10;
/// Allowed excess of the exact-rate arccos argument beyond magnitude 1.
pub const EXACT_ARCCOS_TOL: f64 = 1e-8;
/// Floor on 1 - x^2 when propagating error through arccos.
const SIN_SQ_FLOOR: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum EstimatorError {
    #[error("counts report has zero shots")]
    ZeroShots,
    #[error("exact rate map lacks configuration {0} required by the classification")]
    MissingConfig(String),
    #[error("chi subset for pair ({0},{1}) is empty")]
    EmptyChiSubset(usize, usize),
    #[error("pairwise overlap for ({a},{b}) is {value:.6e}, outside [-{tol:.3e}, 1+{tol:.3e}]")]
    PairwiseOutOfRange { a: usize, b: usize, value: f64, tol: f64 },
    #[error("overlap amplitude {amplitude:.3e} below threshold {threshold:.3e}; phase unrecoverable")]
    AmplitudeTooSmall { amplitude: f64, threshold: f64 },
    #[error("arccos argument exceeds magnitude 1 by {excess:.3e}, beyond tolerance {tol:.3e}")]
    ArccosExcess { excess: f64, tol: f64 },
}

/// Full estimate from one rate report. Standard-error fields are present
/// exactly when the rates came from sampled counts. `phase_abs` is absent
/// when the amplitude is below the mode's refusal floor (phase unrecoverable:
/// the inversion divides by the amplitude) -- [`AMPLITUDE_THRESHOLD`] for
/// sampled counts, [`EXACT_AMPLITUDE_FLOOR`] for exact rates.
#[derive(Clone, Debug, PartialEq)]
pub struct EstimateReport {
    pub n: usize,
    /// Raw inverted pairwise overlaps keyed by photon pair, unclamped.
    pub pairwise: BTreeMap<(usize, usize), f64>,
    /// The same values clamped into [0, 1] (used for the amplitude).
    pub pairwise_clamped: BTreeMap<(usize, usize), f64>,
    pub pairwise_stderr: Option<BTreeMap<(usize, usize), f64>>,
    /// Largest distance any raw pairwise value sat outside [0, 1].
    pub max_pairwise_deviation: f64,
    pub amplitude: f64,
    pub amplitude_stderr: Option<f64>,
    /// Even-minus-odd sum of phase-bearing rates.
    pub diff_statistic: f64,
    pub diff_stderr: Option<f64>,
    pub phase_abs: Option<f64>,
    /// The sign of the phase is not observable; both candidates are reported.
    pub phase_candidates: Option<[f64; 2]>,
    pub phase_stderr: Option<f64>,
    /// Pre-clamp excess of the arccos argument beyond magnitude 1.
    pub arccos_excess: f64,
}

/// Standalone result of the phase inversion.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseEstimate {
    pub phase_abs: f64,
    pub diff_statistic: f64,
    pub arccos_excess: f64,
    pub diff_stderr: Option<f64>,
    pub phase_stderr: Option<f64>,
}

/// Empirical frequencies from integer counts: rate = count / shots with the
/// discard included in the denominator, binomial standard error per entry.
pub fn rates_from_counts(counts: &CountsReport) -> Result<CoincidenceReport, EstimatorError> {
    if counts.shots == 0 {
        return Err(EstimatorError::ZeroShots);
    }
    let shots = counts.shots as f64;
    let mut rates = BTreeMap::new();
    for (eta, &c) in &counts.counts {
        let p = c as f64 / shots;
        let stderr = (p * (1.0 - p) / shots).sqrt();
        rates.insert(
            eta.clone(),
            RateEntry { rate: p, im_residual: 0.0, stderr: Some(stderr) },
        );
    }
    Ok(CoincidenceReport {
        rates,
        discard_mass: counts.discard as f64 / shots,
        total_shots: Some(counts.shots),
    })
}

fn chi_inversion_factor(n: usize) -> f64 {
    (1u64 << (n + 1)) as f64 / (n - 1) as f64
}

/// Sum a class of configurations out of the report. Exact reports must
/// contain every member; sampled reports treat absent members as zero counts.
fn class_sum<'a>(
    rates: &CoincidenceReport,
    members: impl Iterator<Item = &'a OutputConfig>,
) -> Result<f64, EstimatorError> {
    let exact = rates.total_shots.is_none();
    let mut sum = 0.0;
    for eta in members {
        match rates.rates.get(eta) {
            Some(entry) => sum += entry.rate,
            None if exact => return Err(EstimatorError::MissingConfig(eta.to_string())),
            None => {}
        }
    }
    Ok(sum)
}

/// Invert each pairwise-class rate sum into the overlap of that photon pair:
/// r = 1 - (2^(n+1)/(n-1)) * sum. Raw values, no clamping.
pub fn pairwise_overlaps(
    rates: &CoincidenceReport,
    cls: &ConfigClassification,
) -> Result<BTreeMap<(usize, usize), f64>, EstimatorError> {
    let factor = chi_inversion_factor(cls.n);
    let mut out = BTreeMap::new();
    for (&(a, b), members) in &cls.chi_subsets {
        if members.is_empty() {
            return Err(EstimatorError::EmptyChiSubset(a, b));
        }
        let sum = class_sum(rates, members.iter())?;
        out.insert((a, b), 1.0 - factor * sum);
    }
    Ok(out)
}

/// Square root of the product of the pairwise overlaps, after clamping each
/// into [0, 1]. A value below -tol signals inconsistent input and is an
/// error rather than a clamp.
pub fn overlap_amplitude(
    pairwise: &BTreeMap<(usize, usize), f64>,
    tol: f64,
) -> Result<f64, EstimatorError> {
    let mut product = 1.0;
    for (&(a, b), &r) in pairwise {
        if r < -tol {
            return Err(EstimatorError::PairwiseOutOfRange { a, b, value: r, tol });
        }
        product *= r.clamp(0.0, 1.0);
    }
    Ok(product.sqrt())
}

fn xi_parity_sums(
    rates: &CoincidenceReport,
    cls: &ConfigClassification,
) -> Result<(f64, f64), EstimatorError> {
    let exact = rates.total_shots.is_none();
    let mut even = 0.0;
    let mut odd = 0.0;
    for eta in &cls.xi {
        let rate = match rates.rates.get(eta) {
            Some(entry) => entry.rate,
            None if exact => return Err(EstimatorError::MissingConfig(eta.to_string())),
            None => 0.0,
        };
        match Parity::of(eta) {
            Parity::Even => even += rate,
            Parity::Odd => odd += rate,
        }
    }
    Ok((even, odd))
}

/// Invert the even-minus-odd phase-bearing sum into the collective phase:
/// psi = arccos(2^(n-1) diff / amplitude), reported as |psi| in [0, pi].
/// Even-parity members carry the +cos branch for every n in this design
/// family, so no parity-independent sign enters the inversion. The arccos
/// argument is clamped into [-1, 1]; excess beyond the mode's tolerance
/// (exact: 1e-8, sampled: 3 sigma) is an error. Refuses amplitudes below
/// [`AMPLITUDE_THRESHOLD`]; use [`collective_phase_with_floor`] to override.
pub fn collective_phase(
    rates: &CoincidenceReport,
    cls: &ConfigClassification,
    amplitude: f64,
) -> Result<PhaseEstimate, EstimatorError> {
    collective_phase_with_floor(rates, cls, amplitude, AMPLITUDE_THRESHOLD)
}

/// [`collective_phase`] with an explicit refusal floor on the amplitude.
/// Exact rates carry no shot noise, so [`estimate`] passes
/// [`EXACT_AMPLITUDE_FLOOR`] for them and [`AMPLITUDE_THRESHOLD`] for counts.
pub fn collective_phase_with_floor(
    rates: &CoincidenceReport,
    cls: &ConfigClassification,
    amplitude: f64,
    floor: f64,
) -> Result<PhaseEstimate, EstimatorError> {
    if amplitude < floor {
        return Err(EstimatorError::AmplitudeTooSmall { amplitude, threshold: floor });
    }
    let n = cls.n;
    let (even, odd) = xi_parity_sums(rates, cls)?;
    let diff = even - odd;
    let diff_stderr = rates.total_shots.map(|shots| {
        ((even + odd - diff * diff).max(0.0) / shots as f64).sqrt()
    });

    let scale = (1u64 << (n - 1)) as f64;
    let x_raw = scale * diff / amplitude;
    let excess = (x_raw.abs() - 1.0).max(0.0);
    let sigma_x = diff_stderr.map(|sd| scale * sd / amplitude);
    let tol = match sigma_x {
        None => EXACT_ARCCOS_TOL,
        Some(s) => 3.0 * s + EXACT_ARCCOS_TOL,
    };
    if excess > tol {
        return Err(EstimatorError::ArccosExcess { excess, tol });
    }
    let x = x_raw.clamp(-1.0, 1.0);
    let phase_abs = x.acos();
    let phase_stderr = sigma_x.map(|s| s / (1.0 - x * x).max(SIN_SQ_FLOOR).sqrt());
    Ok(PhaseEstimate { phase_abs, diff_statistic: diff, arccos_excess: excess, diff_stderr, phase_stderr })
}

/// Full inversion pipeline over one rate report. Pairwise range checks use
/// 1e-10 for exact rates and 3 sigma for sampled ones; an amplitude below the
/// mode's refusal floor yields a report without phase fields instead of an
/// error.
pub fn estimate(
    rates: &CoincidenceReport,
    cls: &ConfigClassification,
) -> Result<EstimateReport, EstimatorError> {
    let n = cls.n;
    let shots = rates.total_shots;
    let pairwise = pairwise_overlaps(rates, cls)?;

    let factor = chi_inversion_factor(n);
    let pairwise_stderr = shots.map(|total| {
        let mut out = BTreeMap::new();
        for (&pair, members) in &cls.chi_subsets {
            let sum: f64 = members.iter().map(|eta| rates.rate_of(eta)).sum();
            let sigma_sum = (sum * (1.0 - sum).max(0.0) / total as f64).sqrt();
            out.insert(pair, factor * sigma_sum);
        }
        out
    });

    let mut max_deviation = 0.0f64;
    let mut max_tol = EXACT_RANGE_TOL;
    let mut clamped = BTreeMap::new();
    for (&(a, b), &r) in &pairwise {
        let tol = match &pairwise_stderr {
            None => EXACT_RANGE_TOL,
            Some(map) => 3.0 * map[&(a, b)] + EXACT_RANGE_TOL,
        };
        max_tol = max_tol.max(tol);
        if r < -tol || r > 1.0 + tol {
            return Err(EstimatorError::PairwiseOutOfRange { a, b, value: r, tol });
        }
        let c = r.clamp(0.0, 1.0);
        max_deviation = max_deviation.max((r - c).abs());
        clamped.insert((a, b), c);
    }

    let amplitude = overlap_amplitude(&pairwise, max_tol)?;
    let amplitude_floor =
        if shots.is_some() { AMPLITUDE_THRESHOLD } else { EXACT_AMPLITUDE_FLOOR };
    let amplitude_stderr = match (&pairwise_stderr, amplitude >= AMPLITUDE_THRESHOLD) {
        (Some(sigmas), true) => {
            let rel_sq: f64 = clamped
                .iter()
                .map(|(pair, &r)| {
                    let rel = sigmas[pair] / r.max(AMPLITUDE_THRESHOLD);
                    rel * rel
                })
                .sum();
            Some(amplitude * 0.5 * rel_sq.sqrt())
        }
        _ => None,
    };

    let mut report = EstimateReport {
        n,
        pairwise,
        pairwise_clamped: clamped,
        pairwise_stderr,
        max_pairwise_deviation: max_deviation,
        amplitude,
        amplitude_stderr,
        diff_statistic: 0.0,
        diff_stderr: None,
        phase_abs: None,
        phase_candidates: None,
        phase_stderr: None,
        arccos_excess: 0.0,
    };

    if amplitude < amplitude_floor {
        let (even, odd) = xi_parity_sums(rates, cls)?;
        report.diff_statistic = even - odd;
        report.diff_stderr = shots.map(|total| {
            let d = even - odd;
            ((even + odd - d * d).max(0.0) / total as f64).sqrt()
        });
        return Ok(report);
    }

    let phase = collective_phase_with_floor(rates, cls, amplitude, amplitude_floor)?;
    report.diff_statistic = phase.diff_statistic;
    report.diff_stderr = phase.diff_stderr;
    report.arccos_excess = phase.arccos_excess;
    report.phase_abs = Some(phase.phase_abs);
    report.phase_candidates = Some([phase.phase_abs, -phase.phase_abs]);
    // Propagate amplitude uncertainty into the phase on top of the diff term.
    report.phase_stderr = match (phase.phase_stderr, phase.diff_stderr, amplitude_stderr) {
        (Some(base), Some(_), Some(sigma_amp)) => {
            let scale = (1u64 << (n - 1)) as f64;
            let x = (phase.diff_statistic * scale / amplitude).clamp(-1.0, 1.0);
            let amp_term = scale * phase.diff_statistic.abs() * sigma_amp / (amplitude * amplitude);
            let sigma_x_diff = base * (1.0 - x * x).max(SIN_SQ_FLOOR).sqrt();
            let sigma_x = (sigma_x_diff * sigma_x_diff + amp_term * amp_term).sqrt();
            Some(sigma_x / (1.0 - x * x).max(SIN_SQ_FLOOR).sqrt())
        }
        (base, _, _) => base,
    };
    Ok(report)
}

/// Trace-out audit of genuine n-photon interference: for every shared-output
/// set, summing its ports out of the phase-bearing rates (for each fixed
/// choice of ports from the other sets) must leave the flat marginal
/// 1/2^(2n-2), independent of the collective phase.
#[derive(Clone, Debug, PartialEq)]
pub struct GenuineReport {
    pub n: usize,
    /// The flat marginal every trace-out must produce.
    pub expected: f64,
    /// All marginals per shared-output set, one per choice of the rest.
    pub marginals: BTreeMap<(usize, usize), Vec<f64>>,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub ok: bool,
    pub violations: Vec<String>,
}

/// Computes every trace-out marginal of the phase-bearing rates and checks
/// flatness within `tol`. Never fails; problems are listed in the report.
pub fn genuine_check(
    rates: &CoincidenceReport,
    o_sets: &OSets,
    cls: &ConfigClassification,
    tol: f64,
) -> GenuineReport {
    let n = cls.n;
    let expected = 1.0 / (1u64 << (2 * n - 2)) as f64;
    let mut marginals: BTreeMap<(usize, usize), Vec<f64>> = BTreeMap::new();
    let mut violations = Vec::new();
    let mut max_deviation = 0.0f64;

    for (&pair, ports) in o_sets {
        // Group phase-bearing members by their ports outside this set; each
        // group is one marginal.
        let mut groups: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
        for eta in &cls.xi {
            let rest: Vec<usize> =
                eta.ports().iter().copied().filter(|p| !ports.contains(p)).collect();
            if rest.len() + 1 != eta.ports().len() {
                continue;
            }
            match rates.rates.get(eta) {
                Some(entry) => *groups.entry(rest).or_insert(0.0) += entry.rate,
                None => violations.push(format!("missing phase-bearing rate for {eta}")),
            }
        }
        let sums: Vec<f64> = groups.into_values().collect();
        for &s in &sums {
            let dev = (s - expected).abs();
            max_deviation = max_deviation.max(dev);
            if dev > tol {
                violations.push(format!(
                    "trace-out of pair ({},{}) gives marginal {s:.12e}, expected {expected:.12e}",
                    pair.0, pair.1
                ));
            }
        }
        marginals.insert(pair, sums);
    }

    let ok = violations.is_empty();
    GenuineReport { n, expected, marginals, max_deviation, tolerance: tol, ok, violations }
}
