//! On-disk formats tying the pipeline stages together: JSON for matrices,
//! Gram matrices, counts, designs, classifications, estimates, and sweep
//! reports; CSV for rate tables. Map-valued data lives in ordered maps and
//! floats serialize with shortest-round-trip formatting, so writing the same
//! value twice produces identical bytes.

use crate::classifier::{ConfigClassification, OSets};
use crate::engine::{
    CoincidenceReport, CountsReport, OutputConfig, RateEntry, ScatteringMatrix,
};
use crate::estimator::EstimateReport;
use crate::graph::{ConnectivityGraph, EDGraph};
use crate::photon::GramMatrix;
use crate::verifier::ConjectureSweepResult;
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{de::DeserializeOwned, Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("malformed CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("invalid file contents: {0}")]
    Invalid(String),
}

fn invalid(msg: impl Into<String>) -> IoError {
    IoError::Invalid(msg.into())
}

// ---------------------------------------------------------------------------
// Generic JSON plumbing
// ---------------------------------------------------------------------------

/// Pretty-printed JSON with a trailing newline; ordered maps make the bytes
/// deterministic for equal values.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), IoError> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    fs::write(path, bytes)?;
    Ok(())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, IoError> {
    let bytes = fs::read(path)?;
    Ok(serde_json::from_slice(&bytes)?)
}

// ---------------------------------------------------------------------------
// Port-list and pair keys
// ---------------------------------------------------------------------------

/// Parse a "1,2,7,8" configuration key.
pub fn parse_config(s: &str) -> Result<OutputConfig, IoError> {
    let ports = s
        .split(',')
        .map(|tok| tok.trim().parse::<usize>().map_err(|e| invalid(format!("port {tok:?}: {e}"))))
        .collect::<Result<Vec<usize>, IoError>>()?;
    OutputConfig::new(ports).map_err(|e| invalid(format!("configuration {s:?}: {e}")))
}

/// "a-b" key for a photon pair, a < b.
pub fn pair_key(pair: (usize, usize)) -> String {
    format!("{}-{}", pair.0, pair.1)
}

pub fn parse_pair_key(s: &str) -> Result<(usize, usize), IoError> {
    let (a, b) = s.split_once('-').ok_or_else(|| invalid(format!("pair key {s:?}")))?;
    let a: usize = a.trim().parse().map_err(|e| invalid(format!("pair key {s:?}: {e}")))?;
    let b: usize = b.trim().parse().map_err(|e| invalid(format!("pair key {s:?}: {e}")))?;
    if a == 0 || b == 0 || a >= b {
        return Err(invalid(format!("pair key {s:?} must satisfy 1 <= a < b")));
    }
    Ok((a, b))
}

// ---------------------------------------------------------------------------
// Unitary and Gram matrices
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnitaryFile {
    pub m: usize,
    /// Row-major (re, im) pairs, m*m of them.
    pub entries: Vec<[f64; 2]>,
}

fn entries_to_matrix(m: usize, n: usize, entries: &[[f64; 2]]) -> Result<DMatrix<C64>, IoError> {
    if entries.len() != m * n {
        return Err(invalid(format!("expected {} entries, found {}", m * n, entries.len())));
    }
    Ok(DMatrix::from_fn(m, n, |i, j| {
        let e = entries[i * n + j];
        C64::new(e[0], e[1])
    }))
}

fn matrix_to_entries(u: &DMatrix<C64>) -> Vec<[f64; 2]> {
    let mut out = Vec::with_capacity(u.nrows() * u.ncols());
    for i in 0..u.nrows() {
        for j in 0..u.ncols() {
            out.push([u[(i, j)].re, u[(i, j)].im]);
        }
    }
    out
}

pub fn unitary_file(u: &ScatteringMatrix) -> UnitaryFile {
    UnitaryFile { m: u.m(), entries: matrix_to_entries(u.matrix()) }
}

pub fn write_unitary(path: &Path, u: &ScatteringMatrix) -> Result<(), IoError> {
    write_json(path, &unitary_file(u))
}

/// Read and certify a scattering matrix; non-unitary contents are invalid.
pub fn read_unitary(path: &Path) -> Result<ScatteringMatrix, IoError> {
    let file: UnitaryFile = read_json(path)?;
    let m = entries_to_matrix(file.m, file.m, &file.entries)?;
    ScatteringMatrix::new(m).map_err(|e| invalid(e.to_string()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GramFile {
    pub n: usize,
    /// Row-major (re, im) pairs, n*n of them.
    pub entries: Vec<[f64; 2]>,
}

pub fn gram_file(g: &GramMatrix) -> GramFile {
    GramFile { n: g.n(), entries: matrix_to_entries(g.matrix()) }
}

pub fn write_gram(path: &Path, g: &GramMatrix) -> Result<(), IoError> {
    write_json(path, &gram_file(g))
}

/// Read and validate a Gram matrix (Hermitian, unit diagonal, PSD).
pub fn read_gram(path: &Path) -> Result<GramMatrix, IoError> {
    let file: GramFile = read_json(path)?;
    let m = entries_to_matrix(file.n, file.n, &file.entries)?;
    GramMatrix::from_matrix(m).map_err(|e| invalid(e.to_string()))
}

// ---------------------------------------------------------------------------
// Rates CSV
// ---------------------------------------------------------------------------

/// Columns: config (comma-joined ports, quoted), rate, im_residual. Rows in
/// configuration order. The discard mass is implicit: 1 minus the rate sum.
/// Floats use the standard shortest-round-trip formatting, so values survive
/// the trip exactly and equal reports produce identical bytes.
pub fn write_rates(path: &Path, report: &CoincidenceReport) -> Result<(), IoError> {
    let mut w =
        csv::WriterBuilder::new().quote_style(csv::QuoteStyle::Necessary).from_path(path)?;
    w.write_record(["config", "rate", "im_residual"])?;
    for (eta, entry) in &report.rates {
        w.write_record([
            eta.to_string(),
            entry.rate.to_string(),
            entry.im_residual.to_string(),
        ])?;
    }
    w.flush().map_err(IoError::Io)?;
    Ok(())
}

pub fn read_rates(path: &Path) -> Result<CoincidenceReport, IoError> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_path(path)?;
    {
        let headers = r.headers()?;
        if headers.iter().collect::<Vec<_>>() != vec!["config", "rate", "im_residual"] {
            return Err(invalid(format!("unexpected rates header {headers:?}")));
        }
    }
    let mut rates = BTreeMap::new();
    let mut total = 0.0f64;
    for record in r.records() {
        let record = record?;
        if record.len() != 3 {
            return Err(invalid(format!("rates row with {} fields", record.len())));
        }
        let eta = parse_config(&record[0])?;
        let rate: f64 =
            record[1].parse().map_err(|e| invalid(format!("rate {:?}: {e}", &record[1])))?;
        let im_residual: f64 =
            record[2].parse().map_err(|e| invalid(format!("residual {:?}: {e}", &record[2])))?;
        if rates.insert(eta.clone(), RateEntry::exact(rate, im_residual)).is_some() {
            return Err(invalid(format!("duplicate configuration {eta}")));
        }
        total += rate;
    }
    Ok(CoincidenceReport { rates, discard_mass: (1.0 - total).max(0.0), total_shots: None })
}

// ---------------------------------------------------------------------------
// Counts JSON
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountsFile {
    pub shots: u64,
    pub seed: u64,
    /// Keys are comma-joined port lists, e.g. "1,2,7,8".
    pub counts: BTreeMap<String, u64>,
    pub discard: u64,
}

pub fn counts_file(report: &CountsReport) -> CountsFile {
    CountsFile {
        shots: report.shots,
        seed: report.seed,
        counts: report.counts.iter().map(|(eta, &c)| (eta.to_string(), c)).collect(),
        discard: report.discard,
    }
}

pub fn write_counts(path: &Path, report: &CountsReport) -> Result<(), IoError> {
    write_json(path, &counts_file(report))
}

pub fn read_counts(path: &Path) -> Result<CountsReport, IoError> {
    let file: CountsFile = read_json(path)?;
    let mut counts = BTreeMap::new();
    let mut sum = file.discard;
    for (key, c) in &file.counts {
        counts.insert(parse_config(key)?, *c);
        sum = sum
            .checked_add(*c)
            .ok_or_else(|| invalid("counts overflow u64"))?;
    }
    if sum != file.shots {
        return Err(invalid(format!(
            "counts plus discard sum to {sum}, expected shots = {}",
            file.shots
        )));
    }
    Ok(CountsReport { shots: file.shots, seed: file.seed, counts, discard: file.discard })
}

// ---------------------------------------------------------------------------
// Graph JSON
// ---------------------------------------------------------------------------

/// {"m": vertex count, "edges": [[a, b], ...]} with 1-based labels. For the
/// bipartite connectivity graph the pairs are (solid input, dashed output);
/// for photon-level graphs both ends are photon labels.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphFile {
    pub m: usize,
    pub edges: Vec<[usize; 2]>,
}

pub fn connectivity_graph_file(g: &ConnectivityGraph) -> GraphFile {
    GraphFile { m: g.m(), edges: g.edges().iter().map(|&(a, b)| [a, b]).collect() }
}

pub fn ed_graph_file(g: &EDGraph) -> GraphFile {
    GraphFile { m: g.n(), edges: g.edges().iter().map(|&(a, b)| [a, b]).collect() }
}

// ---------------------------------------------------------------------------
// Design JSON
// ---------------------------------------------------------------------------

/// Everything needed to reproduce a design apart from the matrix itself
/// (which goes in the unitary file): photon count, input ports, the cycle
/// permutation sigma, the relabeling rho (both as 1-based image tables), and
/// the shared-output sets keyed "i-j".
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DesignFile {
    pub n: usize,
    pub v: Vec<usize>,
    pub sigma: Vec<usize>,
    pub rho: Vec<usize>,
    pub o_sets: BTreeMap<String, Vec<usize>>,
}

impl DesignFile {
    pub fn o_sets_map(&self) -> Result<OSets, IoError> {
        let mut out = OSets::new();
        for (key, ports) in &self.o_sets {
            let pair = parse_pair_key(key)?;
            out.insert(pair, ports.iter().copied().collect::<BTreeSet<usize>>());
        }
        Ok(out)
    }
}

pub fn design_file(design: &crate::designer::SparseDesign) -> DesignFile {
    DesignFile {
        n: design.n(),
        v: design.input().ports().to_vec(),
        sigma: design.sigma().images().to_vec(),
        rho: design.rho().images().to_vec(),
        o_sets: design
            .output_sets()
            .iter()
            .map(|(&pair, ports)| (pair_key(pair), ports.iter().copied().collect()))
            .collect(),
    }
}

pub fn write_design(path: &Path, design: &crate::designer::SparseDesign) -> Result<(), IoError> {
    write_json(path, &design_file(design))
}

pub fn read_design(path: &Path) -> Result<DesignFile, IoError> {
    let file: DesignFile = read_json(path)?;
    if file.n < 3 {
        return Err(invalid(format!("design needs n >= 3, found {}", file.n)));
    }
    if file.v.len() != file.n || file.sigma.len() != file.n || file.rho.len() != file.n {
        return Err(invalid("v, sigma, rho must each list n entries"));
    }
    Ok(file)
}

// ---------------------------------------------------------------------------
// Classification JSON
// ---------------------------------------------------------------------------

/// Configurations as sorted port arrays; chi keyed by photon pair "i-j".
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassificationFile {
    pub xi: Vec<Vec<usize>>,
    pub zeta: Vec<Vec<usize>>,
    pub chi: BTreeMap<String, Vec<Vec<usize>>>,
    pub chi_rest: Vec<Vec<usize>>,
}

fn config_list(set: &BTreeSet<OutputConfig>) -> Vec<Vec<usize>> {
    set.iter().map(|eta| eta.ports().to_vec()).collect()
}

fn config_set(list: &[Vec<usize>]) -> Result<BTreeSet<OutputConfig>, IoError> {
    list.iter()
        .map(|ports| {
            OutputConfig::new(ports.clone()).map_err(|e| invalid(format!("{ports:?}: {e}")))
        })
        .collect()
}

pub fn classification_file(cls: &ConfigClassification) -> ClassificationFile {
    ClassificationFile {
        xi: config_list(&cls.xi),
        zeta: config_list(&cls.zeta),
        chi: cls
            .chi_subsets
            .iter()
            .map(|(&pair, members)| (pair_key(pair), config_list(members)))
            .collect(),
        chi_rest: config_list(&cls.chi_rest),
    }
}

pub fn write_classification(path: &Path, cls: &ConfigClassification) -> Result<(), IoError> {
    write_json(path, &classification_file(cls))
}

pub fn read_classification(path: &Path) -> Result<ConfigClassification, IoError> {
    let file: ClassificationFile = read_json(path)?;
    let xi = config_set(&file.xi)?;
    let n = xi
        .iter()
        .next()
        .map(|eta| eta.ports().len())
        .ok_or_else(|| invalid("classification with empty phase-bearing set"))?;
    let mut chi_subsets = BTreeMap::new();
    for (key, members) in &file.chi {
        chi_subsets.insert(parse_pair_key(key)?, config_set(members)?);
    }
    Ok(ConfigClassification {
        n,
        m: 2 * n,
        xi,
        zeta: config_set(&file.zeta)?,
        chi_subsets,
        chi_rest: config_set(&file.chi_rest)?,
    })
}

// ---------------------------------------------------------------------------
// Estimate JSON
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateDiagnostics {
    pub n: usize,
    pub max_pairwise_deviation: f64,
    pub arccos_excess: f64,
    pub pairwise_clamped: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pairwise_stderr: Option<BTreeMap<String, f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub amplitude_stderr: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diff_stderr: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phase_stderr: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateFile {
    /// Raw pairwise overlaps keyed "i-j".
    pub pairwise: BTreeMap<String, f64>,
    pub amplitude: f64,
    /// Absent when the amplitude is below the recoverability threshold.
    pub phase_abs: Option<f64>,
    pub phase_candidates: Option<[f64; 2]>,
    pub diff: f64,
    pub diagnostics: EstimateDiagnostics,
}

fn pair_map(map: &BTreeMap<(usize, usize), f64>) -> BTreeMap<String, f64> {
    map.iter().map(|(&pair, &v)| (pair_key(pair), v)).collect()
}

pub fn estimate_file(report: &EstimateReport) -> EstimateFile {
    EstimateFile {
        pairwise: pair_map(&report.pairwise),
        amplitude: report.amplitude,
        phase_abs: report.phase_abs,
        phase_candidates: report.phase_candidates,
        diff: report.diff_statistic,
        diagnostics: EstimateDiagnostics {
            n: report.n,
            max_pairwise_deviation: report.max_pairwise_deviation,
            arccos_excess: report.arccos_excess,
            pairwise_clamped: pair_map(&report.pairwise_clamped),
            pairwise_stderr: report.pairwise_stderr.as_ref().map(pair_map),
            amplitude_stderr: report.amplitude_stderr,
            diff_stderr: report.diff_stderr,
            phase_stderr: report.phase_stderr,
        },
    }
}

pub fn write_estimate(path: &Path, report: &EstimateReport) -> Result<(), IoError> {
    write_json(path, &estimate_file(report))
}

pub fn read_estimate(path: &Path) -> Result<EstimateFile, IoError> {
    read_json(path)
}

// ---------------------------------------------------------------------------
// Sweep JSON
// ---------------------------------------------------------------------------

pub fn write_sweep(path: &Path, result: &ConjectureSweepResult) -> Result<(), IoError> {
    write_json(path, result)
}

pub fn read_sweep(path: &Path) -> Result<ConjectureSweepResult, IoError> {
    read_json(path)
}
