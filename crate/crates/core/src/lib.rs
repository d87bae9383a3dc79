//! Simulation and analysis of genuine multiphoton interference in sparse
//! linear-optical interferometers.
//!
//! The crate covers the full pipeline from interferometer design to phase
//! recovery:
//!
//! | module | provides |
//! |---|---|
//! | [`photon`] | internal states, Gram matrices of pairwise overlaps, permutation overlap products |
//! | [`engine`] | exact coincidence rates for partially distinguishable photons, multinomial sampling |
//! | [`graph`] | bipartite connectivity graphs, photon-level minors, output-port sharing sets |
//! | [`designer`] | the 2n-mode constant-depth sparse interferometer family |
//! | [`classifier`] | output-configuration classes (phase-bearing, forbidden, pairwise-overlap) |
//! | [`estimator`] | recovery of pairwise overlaps and the collective phase from rates or counts |
//! | [`verifier`] | permanents, Fourier matrices, Haar sampling, permanent-bound sweeps |
//! | [`io`] | on-disk formats used by the command-line pipeline |
//!
//! Port and photon labels are 1-based throughout the public API, matching the
//! on-disk formats; raw `nalgebra` matrices remain 0-indexed.

pub mod classifier;
pub mod designer;
pub mod engine;
pub mod estimator;
pub mod graph;
pub mod io;
pub mod photon;
pub mod verifier;

pub(crate) mod util;

pub use classifier::{
    chi_subsets, classify, classify_sets, parity, xi_set, zeta_set, ConfigClassification, OSets,
    Parity,
};
pub use designer::{
    build_sparse_unitary, canonical_cycle, pattern_unitarity_defect, resource_comparison,
    ResourceComparison, SparseDesign,
};
pub use engine::{
    all_rates, all_rates_with_cap, coincidence_rate, distinguishable_oracle,
    indistinguishable_oracle, rate_detail, rate_from_overlaps, sample_counts, validate_unitary,
    CoincidenceReport, CountsReport, InputConfig, OutputConfig, RateEntry, ScatteringMatrix,
};
pub use estimator::{
    collective_phase, collective_phase_with_floor, estimate, genuine_check, overlap_amplitude,
    pairwise_overlaps, rates_from_counts, EstimateReport, GenuineReport, PhaseEstimate,
};
pub use graph::{
    connectivity_graph, enhanced_graph, minor_graph, output_sets, pure_cycle_check,
    ConnectivityGraph, CycleVerdict, EDGraph,
};
pub use photon::{
    collective_phase_of_cycle, cycle_decompose, gram_from_states, overlap_r, validate_gram,
    GramMatrix, InternalState, Permutation,
};
pub use verifier::{
    carlen_bound, conjecture_statistic, conjecture_sweep, fourier_matrix, haar_random_unitary,
    ryser_permanent, ConjectureSweepResult,
};
