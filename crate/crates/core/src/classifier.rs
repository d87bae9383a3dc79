//! Partition of all collision-free output configurations of a sparse design
//! into the phase-bearing set xi (one port from every shared-output set),
//! the forbidden set zeta (some photon's reachable ports all unmonitored,
//! hence exact rate zero), the pairwise sets chi_{i,j} (both ports of one
//! shared-output set, at most one elsewhere; rate depends only on the
//! overlap of photons i and j), and the remainder chi_rest, plus the port
//! parity that splits xi into halves of opposite phase dependence.

use crate::designer::SparseDesign;
use crate::engine::OutputConfig;
use crate::util::combinations_lex;
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

/// Shared-output sets keyed by photon pair (i, j), i < j.
pub type OSets = BTreeMap<(usize, usize), BTreeSet<usize>>;

#[derive(Debug, Error)]
pub enum ClassifierError {
    #[error("shared-output sets must be nonempty")]
    NoSets,
    #[error("output port {0} appears in two shared-output sets")]
    NonDisjoint(usize),
    #[error("shared-output set for pair ({0},{1}) is empty")]
    EmptySet(usize, usize),
    #[error("port {port} out of range [1..{m}]")]
    PortOutOfRange { port: usize, m: usize },
    #[error("photon {photon} appears in {count} pairs, expected exactly 2 (cycle structure)")]
    NotACycle { photon: usize, count: usize },
}

/// Parity of an output configuration: (-1) raised to the sum of its ports.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of(eta: &OutputConfig) -> Self {
        if eta.port_sum() % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn value(self) -> i32 {
        match self {
            Parity::Even => 1,
            Parity::Odd => -1,
        }
    }

    pub fn is_even(self) -> bool {
        self == Parity::Even
    }
}

/// Parity of an output configuration.
pub fn parity(eta: &OutputConfig) -> Parity {
    Parity::of(eta)
}

/// Full partition of the collision-free configurations of one design.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigClassification {
    pub n: usize,
    pub m: usize,
    /// Phase-bearing: one port from every shared-output set.
    pub xi: BTreeSet<OutputConfig>,
    /// Forbidden: exact rate zero (an uncovered photon).
    pub zeta: BTreeSet<OutputConfig>,
    /// Pairwise: both ports of the keyed set, at most one port elsewhere.
    pub chi_subsets: BTreeMap<(usize, usize), BTreeSet<OutputConfig>>,
    /// Everything else (tied to two or more pairwise overlaps).
    pub chi_rest: BTreeSet<OutputConfig>,
}

impl ConfigClassification {
    /// Total members across all four classes.
    pub fn total(&self) -> usize {
        self.xi.len()
            + self.zeta.len()
            + self.chi_subsets.values().map(|s| s.len()).sum::<usize>()
            + self.chi_rest.len()
    }

    /// The xi members of one parity.
    pub fn xi_with_parity(&self, p: Parity) -> Vec<&OutputConfig> {
        self.xi.iter().filter(|eta| Parity::of(eta) == p).collect()
    }
}

fn check_sets(o_sets: &OSets, m: usize) -> Result<(), ClassifierError> {
    if o_sets.is_empty() {
        return Err(ClassifierError::NoSets);
    }
    let mut seen_ports = BTreeSet::new();
    let mut photon_count: BTreeMap<usize, usize> = BTreeMap::new();
    for (&(a, b), ports) in o_sets {
        if ports.is_empty() {
            return Err(ClassifierError::EmptySet(a, b));
        }
        *photon_count.entry(a).or_insert(0) += 1;
        *photon_count.entry(b).or_insert(0) += 1;
        for &p in ports {
            if p < 1 || p > m {
                return Err(ClassifierError::PortOutOfRange { port: p, m });
            }
            if !seen_ports.insert(p) {
                return Err(ClassifierError::NonDisjoint(p));
            }
        }
    }
    for (&photon, &count) in &photon_count {
        if count != 2 {
            return Err(ClassifierError::NotACycle { photon, count });
        }
    }
    Ok(())
}

/// All configurations taking exactly one port from every shared-output set.
pub fn xi_set(o_sets: &OSets, m: usize) -> Result<BTreeSet<OutputConfig>, ClassifierError> {
    check_sets(o_sets, m)?;
    let mut configs: Vec<Vec<usize>> = vec![Vec::new()];
    for ports in o_sets.values() {
        let mut next = Vec::with_capacity(configs.len() * ports.len());
        for base in &configs {
            for &p in ports {
                let mut cfg = base.clone();
                cfg.push(p);
                next.push(cfg);
            }
        }
        configs = next;
    }
    Ok(configs
        .into_iter()
        .map(|ports| OutputConfig::new(ports).expect("disjoint sets give distinct ports"))
        .collect())
}

/// Photon -> union of its two adjacent shared-output sets (its reachable
/// monitored ports within the design).
fn photon_reach(o_sets: &OSets) -> BTreeMap<usize, BTreeSet<usize>> {
    let mut reach: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    for (&(a, b), ports) in o_sets {
        for photon in [a, b] {
            reach.entry(photon).or_default().extend(ports.iter().copied());
        }
    }
    reach
}

/// All forbidden configurations: some photon has no monitored port in either
/// of its adjacent shared-output sets. Every member has exact rate zero.
pub fn zeta_set(o_sets: &OSets, m: usize) -> Result<BTreeSet<OutputConfig>, ClassifierError> {
    check_sets(o_sets, m)?;
    let n = o_sets.len();
    let reach = photon_reach(o_sets);
    let mut zeta = BTreeSet::new();
    for ports in combinations_lex(m, n) {
        let port_set: BTreeSet<usize> = ports.iter().copied().collect();
        if reach.values().any(|r| r.is_disjoint(&port_set)) {
            zeta.insert(OutputConfig::new(ports).expect("combination ports are distinct"));
        }
    }
    Ok(zeta)
}

/// For each photon pair key: all configurations containing both ports of
/// that shared-output set and at most one port from each other set (no ports
/// outside the sets). Cardinality (n-1) * 2^(n-2) for two-element sets.
pub fn chi_subsets(
    o_sets: &OSets,
    m: usize,
) -> Result<BTreeMap<(usize, usize), BTreeSet<OutputConfig>>, ClassifierError> {
    check_sets(o_sets, m)?;
    let n = o_sets.len();
    let mut out = BTreeMap::new();
    for (&pair, own_ports) in o_sets {
        let mut members = BTreeSet::new();
        if own_ports.len() >= 2 {
            let others: Vec<&BTreeSet<usize>> =
                o_sets.iter().filter(|(&k, _)| k != pair).map(|(_, s)| s).collect();
            // Pick both ports of the designated set when it has exactly two;
            // for larger sets pick every 2-subset.
            let own: Vec<usize> = own_ports.iter().copied().collect();
            for first in 0..own.len() {
                for second in (first + 1)..own.len() {
                    // One of the n-1 other sets stays empty; the rest give one port.
                    for empty_idx in 0..others.len() {
                        let mut partial: Vec<Vec<usize>> =
                            vec![vec![own[first], own[second]]];
                        for (idx, set) in others.iter().enumerate() {
                            if idx == empty_idx {
                                continue;
                            }
                            let mut next = Vec::with_capacity(partial.len() * set.len());
                            for base in &partial {
                                for &p in set.iter() {
                                    let mut cfg = base.clone();
                                    cfg.push(p);
                                    next.push(cfg);
                                }
                            }
                            partial = next;
                        }
                        for cfg in partial {
                            if cfg.len() == n {
                                members.insert(
                                    OutputConfig::new(cfg).expect("disjoint sets, distinct ports"),
                                );
                            }
                        }
                    }
                }
            }
        }
        out.insert(pair, members);
    }
    Ok(out)
}

/// Classify every collision-free configuration of the design by counting
/// monitored ports per shared-output set: all ones is xi; an uncovered
/// photon is zeta; exactly one doubled set is chi of that pair; anything
/// else is chi_rest.
pub fn classify(design: &SparseDesign) -> ConfigClassification {
    classify_sets(design.output_sets(), 2 * design.n())
        .expect("design invariants guarantee valid sets")
}

/// [`classify`] over bare shared-output sets, for callers holding a design
/// description rather than the built design. The sets must partition their
/// ports and their pair keys must form one cycle over the photons.
pub fn classify_sets(o_sets: &OSets, m: usize) -> Result<ConfigClassification, ClassifierError> {
    check_sets(o_sets, m)?;
    let n = o_sets.len();

    let mut port_owner: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
    for (&pair, ports) in o_sets {
        for &p in ports {
            port_owner.insert(p, pair);
        }
    }
    let reach = photon_reach(o_sets);

    let mut xi = BTreeSet::new();
    let mut zeta = BTreeSet::new();
    let mut chi: BTreeMap<(usize, usize), BTreeSet<OutputConfig>> =
        o_sets.keys().map(|&k| (k, BTreeSet::new())).collect();
    let mut chi_rest = BTreeSet::new();

    for ports in combinations_lex(m, n) {
        let eta = OutputConfig::new(ports.clone()).expect("combination ports are distinct");
        let mut counts: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for &p in &ports {
            // Ports outside every set (possible for degenerate inputs) own
            // no count; such configs can never classify as xi.
            if let Some(&owner) = port_owner.get(&p) {
                *counts.entry(owner).or_insert(0) += 1;
            }
        }
        if counts.len() == n && counts.values().all(|&c| c == 1) {
            xi.insert(eta);
            continue;
        }
        let port_set: BTreeSet<usize> = ports.iter().copied().collect();
        if reach.values().any(|r| r.is_disjoint(&port_set)) {
            zeta.insert(eta);
            continue;
        }
        let doubled: Vec<(usize, usize)> =
            counts.iter().filter(|(_, &c)| c >= 2).map(|(&k, _)| k).collect();
        if doubled.len() == 1 {
            chi.get_mut(&doubled[0]).expect("key from o_sets").insert(eta);
        } else {
            chi_rest.insert(eta);
        }
    }

    Ok(ConfigClassification { n, m, xi, zeta, chi_subsets: chi, chi_rest })
}
