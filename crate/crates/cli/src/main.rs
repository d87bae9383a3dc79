//! Command-line pipeline over the core library: design a sparse
//! interferometer, simulate exact coincidence rates, draw shot counts,
//! classify output configurations, invert estimates, export graphs, sweep
//! the full-cycle interference bound, and compare resource footprints.
//!
//! Every file-writing command drops a `manifest.json` (or
//! `<out>.manifest.json` for single-file outputs) recording the command,
//! tool version, seed, and a digest of every input file. Outputs themselves
//! carry no timestamps, so identical inputs and seeds reproduce identical
//! bytes; the timestamp lives only in the manifest.

use clap::{ArgGroup, Parser, Subcommand, ValueEnum};
use mcphase::classifier::ClassifierError;
use mcphase::designer::DesignerError;
use mcphase::engine::EngineError;
use mcphase::estimator::EstimatorError;
use mcphase::graph::{GraphError, DEFAULT_EDGE_THRESHOLD};
use mcphase::io::{self, IoError};
use mcphase::verifier::VerifierError;
use mcphase::{
    all_rates, build_sparse_unitary, classify_sets, conjecture_sweep, connectivity_graph,
    enhanced_graph, estimate, minor_graph, rate_detail, rates_from_counts, resource_comparison,
    sample_counts, CoincidenceReport, ConfigClassification, InputConfig,
};
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

// ---------------------------------------------------------------------------
// Errors and exit codes
// ---------------------------------------------------------------------------

/// Exit codes: 0 ok, 1 I/O, 2 usage, 3 validation, 4 numerical consistency.
#[derive(Debug)]
enum CliError {
    Io(String),
    Usage(String),
    Validation(String),
    Numerical(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Validation(_) => 3,
            CliError::Numerical(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Io(msg) => write!(f, "i/o: {msg}"),
            CliError::Usage(msg) => write!(f, "usage: {msg}"),
            CliError::Validation(msg) => write!(f, "validation: {msg}"),
            CliError::Numerical(msg) => write!(f, "numerical: {msg}"),
        }
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        match e {
            IoError::Invalid(msg) => CliError::Validation(msg),
            other => CliError::Io(other.to_string()),
        }
    }
}

impl From<EngineError> for CliError {
    fn from(e: EngineError) -> Self {
        match e {
            EngineError::ImaginaryResidual { .. }
            | EngineError::NegativeRate { .. }
            | EngineError::NormalizationFault { .. } => CliError::Numerical(e.to_string()),
            EngineError::NoShots => CliError::Usage(e.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<EstimatorError> for CliError {
    fn from(e: EstimatorError) -> Self {
        match e {
            EstimatorError::PairwiseOutOfRange { .. }
            | EstimatorError::AmplitudeTooSmall { .. }
            | EstimatorError::ArccosExcess { .. } => CliError::Numerical(e.to_string()),
            EstimatorError::ZeroShots => CliError::Usage(e.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<DesignerError> for CliError {
    fn from(e: DesignerError) -> Self {
        match e {
            DesignerError::TooFewPhotons(_) => CliError::Usage(e.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<ClassifierError> for CliError {
    fn from(e: ClassifierError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<GraphError> for CliError {
    fn from(e: GraphError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<VerifierError> for CliError {
    fn from(e: VerifierError) -> Self {
        CliError::Usage(e.to_string())
    }
}

// ---------------------------------------------------------------------------
// Run manifests
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct RunManifest {
    command: String,
    version: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    /// Input path -> SHA-256 of its bytes.
    inputs: BTreeMap<String, String>,
    timestamp: String,
}

fn sha256_hex(path: &Path) -> Result<String, CliError> {
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    Ok(hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect::<String>())
}

/// UTC timestamp in RFC 3339 form, from the system clock only; manifests are
/// the single place a run's outputs are time-stamped.
fn utc_now() -> String {
    let secs = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let days = (secs / 86_400) as i64;
    let rem = secs % 86_400;
    let (hh, mm, ss) = (rem / 3600, (rem % 3600) / 60, rem % 60);
    // Civil date from day count (proleptic Gregorian).
    let z = days + 719_468;
    let era = z.div_euclid(146_097);
    let doe = z.rem_euclid(146_097);
    let yoe = (doe - doe / 1460 + doe / 36_524 - doe / 146_096) / 365;
    let doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    let mp = (5 * doy + 2) / 153;
    let day = doy - (153 * mp + 2) / 5 + 1;
    let month = if mp < 10 { mp + 3 } else { mp - 9 };
    let year = yoe + era * 400 + i64::from(month <= 2);
    format!("{year:04}-{month:02}-{day:02}T{hh:02}:{mm:02}:{ss:02}Z")
}

fn write_manifest(
    path: &Path,
    command: &str,
    inputs: &[&Path],
    seed: Option<u64>,
) -> Result<(), CliError> {
    let mut digests = BTreeMap::new();
    for input in inputs {
        digests.insert(input.display().to_string(), sha256_hex(input)?);
    }
    let manifest = RunManifest {
        command: command.to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed,
        inputs: digests,
        timestamp: utc_now(),
    };
    io::write_json(path, &manifest)?;
    Ok(())
}

/// Manifest path for a single-file output: `<out>.manifest.json` beside it.
fn sibling_manifest(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    out.with_file_name(name)
}

// ---------------------------------------------------------------------------
// Argument surface
// ---------------------------------------------------------------------------

#[derive(Parser)]
#[command(
    name = "mcphase",
    version,
    about = "Sparse-interferometer multiphoton interference pipeline"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the sparse 2n-mode interferometer for n photons.
    Design(DesignArgs),
    /// Compute exact coincidence rates for a unitary, overlaps, and input.
    Simulate(SimulateArgs),
    /// Draw multinomial shot counts from a full rate table.
    Sample(SampleArgs),
    /// Partition a design's output configurations by information content.
    Classify(ClassifyArgs),
    /// Invert rates or counts into overlaps, amplitude, and phase.
    Estimate(EstimateArgs),
    /// Export connectivity and photon-interference graphs as DOT.
    Graphs(GraphsArgs),
    /// Sweep the full-cycle interference statistic against its bound.
    VerifyAppendix(VerifyAppendixArgs),
    /// Compare the sparse scheme's resources against a dense rival.
    CompareResources(CompareResourcesArgs),
}

#[derive(clap::Args)]
struct DesignArgs {
    /// Photon count (at least 3).
    #[arg(long, value_parser = clap::value_parser!(u64).range(3..))]
    n: u64,
    /// Output directory for unitary.json, design.json, manifest.json.
    #[arg(long)]
    out: PathBuf,
}

#[derive(clap::Args)]
#[command(group(ArgGroup::new("scope").required(true).multiple(false)))]
struct SimulateArgs {
    /// Certified unitary JSON.
    #[arg(long)]
    unitary: PathBuf,
    /// Pairwise-overlap (Gram) JSON.
    #[arg(long)]
    gram: PathBuf,
    /// Input ports, comma-separated ("1,3,5,7").
    #[arg(long)]
    input: String,
    /// Single output configuration, comma-separated.
    #[arg(long, group = "scope")]
    config: Option<String>,
    /// Enumerate every collision-free configuration.
    #[arg(long, group = "scope")]
    all: bool,
    /// Output rates CSV.
    #[arg(long)]
    out: PathBuf,
}

#[derive(clap::Args)]
struct SampleArgs {
    /// Rates CSV from `simulate --all`.
    #[arg(long)]
    rates: PathBuf,
    /// Shot count (at least 1).
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    shots: u64,
    /// RNG seed; sampling without an explicit seed is an error.
    #[arg(long)]
    seed: u64,
    /// Output counts JSON.
    #[arg(long)]
    out: PathBuf,
}

#[derive(clap::Args)]
struct ClassifyArgs {
    /// Design JSON from `design`.
    #[arg(long)]
    design: PathBuf,
    /// Output classification JSON.
    #[arg(long)]
    out: PathBuf,
    /// Audit that the partition covers all C(2n, n) configurations.
    #[arg(long)]
    audit: bool,
}

#[derive(clap::Args)]
#[command(group(ArgGroup::new("source").required(true).multiple(false)))]
struct EstimateArgs {
    /// Exact rates CSV.
    #[arg(long, group = "source")]
    rates: Option<PathBuf>,
    /// Sampled counts JSON.
    #[arg(long, group = "source")]
    counts: Option<PathBuf>,
    /// Design JSON, cross-checked against the classification.
    #[arg(long)]
    design: PathBuf,
    /// Classification JSON from `classify`.
    #[arg(long)]
    classification: PathBuf,
    /// Output estimate JSON.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum GraphFormat {
    Dot,
}

#[derive(clap::Args)]
struct GraphsArgs {
    /// Certified unitary JSON.
    #[arg(long)]
    unitary: PathBuf,
    /// Input ports, comma-separated.
    #[arg(long)]
    input: String,
    /// Output format.
    #[arg(long, value_enum, default_value = "dot")]
    format: GraphFormat,
    /// Output directory for connectivity.dot, photons.dot, manifest.json.
    #[arg(long)]
    out: PathBuf,
}

#[derive(clap::Args)]
struct VerifyAppendixArgs {
    /// Mode counts to sweep: "3..5" (inclusive) or a single "4"; cap 3..=7.
    #[arg(long = "n-range")]
    n_range: String,
    /// Random unitaries per mode count.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    samples: u64,
    /// Base RNG seed; sweeps without an explicit seed are an error.
    #[arg(long)]
    seed: u64,
    /// Output directory for sweep_n<k>.json files and manifest.json.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum TableFormat {
    Text,
    Csv,
}

#[derive(clap::Args)]
struct CompareResourcesArgs {
    /// Photon count (at least 3).
    #[arg(long, value_parser = clap::value_parser!(u64).range(3..))]
    n: u64,
    /// Table format on stdout.
    #[arg(long, value_enum, default_value = "text")]
    format: TableFormat,
}

// ---------------------------------------------------------------------------
// Shared helpers
// ---------------------------------------------------------------------------

fn parse_port_list(flag: &str, s: &str) -> Result<Vec<usize>, CliError> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|e| CliError::Usage(format!("--{flag} {s:?}: {e}")))
        })
        .collect()
}

fn input_config(s: &str) -> Result<InputConfig, CliError> {
    Ok(InputConfig::new(parse_port_list("input", s)?)?)
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn binomial(m: usize, n: usize) -> u64 {
    let mut acc = 1u64;
    for k in 0..n {
        acc = acc * (m - k) as u64 / (k as u64 + 1);
    }
    acc
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

fn cmd_design(args: DesignArgs) -> Result<(), CliError> {
    let design = build_sparse_unitary(args.n as usize)?;
    ensure_dir(&args.out)?;
    io::write_unitary(&args.out.join("unitary.json"), design.unitary())?;
    io::write_design(&args.out.join("design.json"), &design)?;
    write_manifest(&args.out.join("manifest.json"), "design", &[], None)?;
    println!(
        "design: n={} modes={} written to {}",
        design.n(),
        2 * design.n(),
        args.out.display()
    );
    Ok(())
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), CliError> {
    let u = io::read_unitary(&args.unitary)?;
    let g = io::read_gram(&args.gram)?;
    let v = input_config(&args.input)?;

    let report: CoincidenceReport = if args.all {
        all_rates(&u, &g, &v)?
    } else {
        let spec = args.config.as_deref().expect("clap group guarantees one source");
        let eta = io::parse_config(spec)?;
        let entry = rate_detail(&u, &g, &v, &eta)?;
        let mut rates = BTreeMap::new();
        let rate = entry.rate;
        rates.insert(eta, entry);
        CoincidenceReport { rates, discard_mass: 1.0 - rate, total_shots: None }
    };
    io::write_rates(&args.out, &report)?;
    write_manifest(
        &sibling_manifest(&args.out),
        "simulate",
        &[&args.unitary, &args.gram],
        None,
    )?;
    println!(
        "simulate: {} configurations, total rate {:.6}, discard {:.6}",
        report.rates.len(),
        report.total_rate(),
        report.discard_mass
    );
    Ok(())
}

fn cmd_sample(args: SampleArgs) -> Result<(), CliError> {
    let rates = io::read_rates(&args.rates)?;
    let counts = sample_counts(&rates, args.shots, args.seed)?;
    io::write_counts(&args.out, &counts)?;
    write_manifest(
        &sibling_manifest(&args.out),
        "sample",
        &[&args.rates],
        Some(args.seed),
    )?;
    println!(
        "sample: {} shots, {} discarded, seed {}",
        counts.shots, counts.discard, counts.seed
    );
    Ok(())
}

fn cmd_classify(args: ClassifyArgs) -> Result<(), CliError> {
    let design = io::read_design(&args.design)?;
    let o_sets = design.o_sets_map()?;
    let cls = classify_sets(&o_sets, 2 * design.n)?;
    io::write_classification(&args.out, &cls)?;
    write_manifest(&sibling_manifest(&args.out), "classify", &[&args.design], None)?;
    println!(
        "classify: phase {} / forbidden {} / pair {} x {} / rest {}",
        cls.xi.len(),
        cls.zeta.len(),
        cls.chi_subsets.len(),
        cls.chi_subsets.values().next().map_or(0, |s| s.len()),
        cls.chi_rest.len()
    );
    if args.audit {
        let total = cls.total() as u64;
        let expected = binomial(2 * design.n, design.n);
        if total != expected {
            return Err(CliError::Numerical(format!(
                "partition audit failed: {total} configurations classified, expected {expected}"
            )));
        }
        println!("audit: partition covers all {expected} configurations");
    }
    Ok(())
}

/// The classification must describe the design it is paired with.
fn check_estimate_inputs(
    design: &io::DesignFile,
    cls: &ConfigClassification,
) -> Result<(), CliError> {
    if cls.n != design.n {
        return Err(CliError::Validation(format!(
            "classification is for {} photons but the design has {}",
            cls.n, design.n
        )));
    }
    let pairs: Vec<(usize, usize)> = design
        .o_sets_map()?
        .keys()
        .copied()
        .collect();
    let cls_pairs: Vec<(usize, usize)> = cls.chi_subsets.keys().copied().collect();
    if pairs != cls_pairs {
        return Err(CliError::Validation(format!(
            "design pairs {pairs:?} do not match classification pairs {cls_pairs:?}"
        )));
    }
    Ok(())
}

fn cmd_estimate(args: EstimateArgs) -> Result<(), CliError> {
    let design = io::read_design(&args.design)?;
    let cls = io::read_classification(&args.classification)?;
    check_estimate_inputs(&design, &cls)?;

    let (rates, source_path) = match (&args.rates, &args.counts) {
        (Some(path), None) => (io::read_rates(path)?, path.clone()),
        (None, Some(path)) => {
            let counts = io::read_counts(path)?;
            (rates_from_counts(&counts)?, path.clone())
        }
        _ => unreachable!("clap group guarantees exactly one source"),
    };

    let report = estimate(&rates, &cls)?;
    io::write_estimate(&args.out, &report)?;
    write_manifest(
        &sibling_manifest(&args.out),
        "estimate",
        &[&source_path, &args.design, &args.classification],
        None,
    )?;

    match report.phase_abs {
        Some(psi) => {
            println!(
                "estimate: amplitude {:.6}, |phase| {:.6} rad{}",
                report.amplitude,
                psi,
                report
                    .phase_stderr
                    .map_or(String::new(), |s| format!(" +/- {s:.2e}"))
            );
            Ok(())
        }
        None => Err(CliError::Numerical(format!(
            "phase unrecoverable: overlap amplitude {:.3e} is below the recoverability floor \
             (report written to {} without phase fields)",
            report.amplitude,
            args.out.display()
        ))),
    }
}

fn cmd_graphs(args: GraphsArgs) -> Result<(), CliError> {
    let GraphFormat::Dot = args.format;
    let u = io::read_unitary(&args.unitary)?;
    let v = input_config(&args.input)?;
    let gc = connectivity_graph(&u, DEFAULT_EDGE_THRESHOLD)?;
    let ge = enhanced_graph(&minor_graph(&gc), &v)?;
    ensure_dir(&args.out)?;
    write_text(&args.out.join("connectivity.dot"), &gc.to_dot())?;
    write_text(&args.out.join("photons.dot"), &ge.to_dot())?;
    write_manifest(&args.out.join("manifest.json"), "graphs", &[&args.unitary], None)?;
    println!(
        "graphs: connectivity {} vertices / {} edges; photons {} vertices / {} edges",
        2 * gc.m(),
        gc.edges().len(),
        ge.n(),
        ge.edges().len()
    );
    Ok(())
}

fn parse_n_range(s: &str) -> Result<(usize, usize), CliError> {
    let bad = || CliError::Usage(format!("--n-range {s:?}: expected \"a..b\" or \"n\""));
    if let Some((a, b)) = s.split_once("..") {
        let lo: usize = a.trim().parse().map_err(|_| bad())?;
        let hi: usize = b.trim().parse().map_err(|_| bad())?;
        if lo > hi {
            return Err(bad());
        }
        Ok((lo, hi))
    } else {
        let n: usize = s.trim().parse().map_err(|_| bad())?;
        Ok((n, n))
    }
}

fn cmd_verify_appendix(args: VerifyAppendixArgs) -> Result<(), CliError> {
    let (lo, hi) = parse_n_range(&args.n_range)?;
    if lo < 3 || hi > 7 {
        return Err(CliError::Usage(format!(
            "--n-range {}..{} outside the supported sweep range 3..7",
            lo, hi
        )));
    }
    ensure_dir(&args.out)?;
    for n in lo..=hi {
        let sweep = conjecture_sweep(n, args.samples as usize, args.seed)?;
        io::write_sweep(&args.out.join(format!("sweep_n{n}.json")), &sweep)?;
        println!(
            "verify: n={n} bound {:.9} fourier {:.9} max-random {:.9} violations {}",
            sweep.bound,
            sweep.fourier_value,
            sweep.max_random_value,
            sweep.violations.len()
        );
    }
    write_manifest(
        &args.out.join("manifest.json"),
        "verify-appendix",
        &[],
        Some(args.seed),
    )?;
    Ok(())
}

fn cmd_compare_resources(args: CompareResourcesArgs) -> Result<(), CliError> {
    let cmp = resource_comparison(args.n as usize)?;
    let rows: [(&str, usize, usize); 4] = [
        ("optical depth", cmp.depth, cmp.rival_depth),
        ("beamsplitters", cmp.beamsplitters, cmp.rival_beamsplitters),
        ("modes", cmp.modes, cmp.rival_modes),
        (
            "extra internal dimensions",
            cmp.extra_internal_dimensions,
            cmp.rival_min_internal_dimensions,
        ),
    ];
    match args.format {
        TableFormat::Text => {
            println!("resource comparison at n = {}", cmp.n);
            println!("{:<28} {:>10} {:>10}", "quantity", "sparse", "rival");
            for (name, sparse, rival) in rows {
                println!("{name:<28} {sparse:>10} {rival:>10}");
            }
        }
        TableFormat::Csv => {
            println!("quantity,sparse,rival");
            for (name, sparse, rival) in rows {
                println!("{name},{sparse},{rival}");
            }
        }
    }
    Ok(())
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Design(args) => cmd_design(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Sample(args) => cmd_sample(args),
        Command::Classify(args) => cmd_classify(args),
        Command::Estimate(args) => cmd_estimate(args),
        Command::Graphs(args) => cmd_graphs(args),
        Command::VerifyAppendix(args) => cmd_verify_appendix(args),
        Command::CompareResources(args) => cmd_compare_resources(args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
