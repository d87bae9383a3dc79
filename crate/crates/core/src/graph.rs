//! Graph views of an interferometer: the bipartite connectivity graph of its
//! nonzero amplitudes, the photon-level minor obtained by contracting
//! input-output-input paths, the enhanced-distinguishability graph for a
//! chosen input configuration, the shared-output sets O_{i,j}, and the
//! pure-cycle test that certifies a design carries exactly one collective
//! phase of maximal order.

use crate::engine::{InputConfig, ScatteringMatrix};
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write as _;
use thiserror::Error;

/// Entries of |U| at or below this are treated as structural zeros.
pub const DEFAULT_EDGE_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("edge threshold must be positive, got {0}")]
    BadThreshold(f64),
    #[error("port {port} out of range [1..{m}]")]
    PortOutOfRange { port: usize, m: usize },
}

/// Bipartite graph of an m-mode interferometer: solid vertices are input
/// ports, dashed vertices are output ports, and an edge means the amplitude
/// between them is nonzero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConnectivityGraph {
    m: usize,
    /// Edges stored as (solid input, dashed output), both 1-based.
    edges: BTreeSet<(usize, usize)>,
}

impl ConnectivityGraph {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn edges(&self) -> &BTreeSet<(usize, usize)> {
        &self.edges
    }

    pub fn has_edge(&self, solid: usize, dashed: usize) -> bool {
        self.edges.contains(&(solid, dashed))
    }

    /// Outputs reachable from input `solid`.
    pub fn dashed_neighbors(&self, solid: usize) -> BTreeSet<usize> {
        self.edges.iter().filter(|(s, _)| *s == solid).map(|(_, d)| *d).collect()
    }

    /// Inputs feeding output `dashed`.
    pub fn solid_neighbors(&self, dashed: usize) -> BTreeSet<usize> {
        self.edges.iter().filter(|(_, d)| *d == dashed).map(|(s, _)| *s).collect()
    }

    pub fn solid_degree(&self, solid: usize) -> usize {
        self.edges.iter().filter(|(s, _)| *s == solid).count()
    }

    pub fn dashed_degree(&self, dashed: usize) -> usize {
        self.edges.iter().filter(|(_, d)| *d == dashed).count()
    }

    /// Graphviz DOT text: solids as filled circles, dasheds as dashed
    /// circles, deterministic vertex and edge order.
    pub fn to_dot(&self) -> String {
        let mut out = String::new();
        out.push_str("graph connectivity {\n  rankdir=LR;\n");
        for s in 1..=self.m {
            let _ = writeln!(
                out,
                "  s{s} [label=\"{s}\", shape=circle, style=filled, fillcolor=lightgray];"
            );
        }
        for d in 1..=self.m {
            let _ = writeln!(out, "  d{d} [label=\"{d}\", shape=circle, style=dashed];");
        }
        for (s, d) in &self.edges {
            let _ = writeln!(out, "  s{s} -- d{d};");
        }
        out.push_str("}\n");
        out
    }
}

/// Simple undirected graph over photon labels (or input-port labels for the
/// minor of a connectivity graph). No self-loops; edges stored (a, b), a < b.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EDGraph {
    n: usize,
    edges: BTreeSet<(usize, usize)>,
}

impl EDGraph {
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let edges = edges
            .into_iter()
            .filter(|&(a, b)| a != b)
            .map(|(a, b)| (a.min(b), a.max(b)))
            .filter(|&(a, b)| a >= 1 && b <= n)
            .collect();
        Self { n, edges }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &BTreeSet<(usize, usize)> {
        &self.edges
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&(a.min(b), a.max(b)))
    }

    pub fn degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|&&(a, b)| a == v || b == v).count()
    }

    pub fn neighbors(&self, v: usize) -> BTreeSet<usize> {
        self.edges
            .iter()
            .filter_map(|&(a, b)| {
                if a == v {
                    Some(b)
                } else if b == v {
                    Some(a)
                } else {
                    None
                }
            })
            .collect()
    }

    /// Graphviz DOT text with a circular layout hint.
    pub fn to_dot(&self) -> String {
        let mut out = String::new();
        out.push_str("graph photons {\n  layout=circo;\n  node [shape=circle];\n");
        for v in 1..=self.n {
            let _ = writeln!(out, "  {v};");
        }
        for (a, b) in &self.edges {
            let _ = writeln!(out, "  {a} -- {b};");
        }
        out.push_str("}\n");
        out
    }
}

/// Outcome of the pure-cycle test.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CycleVerdict {
    /// True iff the graph is a single cycle through all vertices.
    pub is_pure_cycle: bool,
    /// The cycle as a vertex sequence starting at 1, oriented toward the
    /// smaller neighbor of 1; present only when `is_pure_cycle`.
    pub cycle: Option<Vec<usize>>,
    /// Cycles shorter than the vertex count found in the graph; each starts
    /// at its minimum vertex, oriented toward the smaller neighbor.
    pub offending_cycles: Vec<Vec<usize>>,
}

/// Connectivity graph of a certified unitary: edge (input j, output i) iff
/// `|U[i][j]| > threshold`.
pub fn connectivity_graph(
    u: &ScatteringMatrix,
    threshold: f64,
) -> Result<ConnectivityGraph, GraphError> {
    if threshold <= 0.0 {
        return Err(GraphError::BadThreshold(threshold));
    }
    let m = u.m();
    let mut edges = BTreeSet::new();
    for j in 1..=m {
        for i in 1..=m {
            if u.entry(i, j).norm() > threshold {
                edges.insert((j, i));
            }
        }
    }
    Ok(ConnectivityGraph { m, edges })
}

/// Contract every input-output-input path of a connectivity graph to a
/// single edge between the two inputs, discarding output vertices: inputs x
/// and z are linked iff some output is reachable from both.
pub fn minor_graph(gc: &ConnectivityGraph) -> EDGraph {
    let m = gc.m();
    let mut edges = BTreeSet::new();
    for d in 1..=m {
        let solids: Vec<usize> = gc.solid_neighbors(d).into_iter().collect();
        for (idx, &x) in solids.iter().enumerate() {
            for &z in &solids[idx + 1..] {
                edges.insert((x, z));
            }
        }
    }
    EDGraph { n: m, edges }
}

/// Restrict a minor graph to the occupied input ports and relabel vertices
/// by photon index: photons i and j are linked iff their entry ports are.
pub fn enhanced_graph(gmc: &EDGraph, v: &InputConfig) -> Result<EDGraph, GraphError> {
    let n = v.n();
    for &p in v.ports() {
        if p > gmc.n() {
            return Err(GraphError::PortOutOfRange { port: p, m: gmc.n() });
        }
    }
    let mut edges = BTreeSet::new();
    for i in 1..=n {
        for j in (i + 1)..=n {
            if gmc.has_edge(v.port_of(i), v.port_of(j)) {
                edges.insert((i, j));
            }
        }
    }
    Ok(EDGraph { n, edges })
}

/// Shared-output sets: `O_{i,j}` is the set of output ports reachable from
/// the entry ports of both photon i and photon j. Pairs whose set is empty
/// are omitted. For a design whose enhanced graph is a pure cycle the sets
/// are pairwise disjoint.
pub fn output_sets(
    gc: &ConnectivityGraph,
    v: &InputConfig,
) -> Result<BTreeMap<(usize, usize), BTreeSet<usize>>, GraphError> {
    let n = v.n();
    for &p in v.ports() {
        if p > gc.m() {
            return Err(GraphError::PortOutOfRange { port: p, m: gc.m() });
        }
    }
    let reach: Vec<BTreeSet<usize>> =
        (1..=n).map(|i| gc.dashed_neighbors(v.port_of(i))).collect();
    let mut sets = BTreeMap::new();
    for i in 1..=n {
        for j in (i + 1)..=n {
            let shared: BTreeSet<usize> =
                reach[i - 1].intersection(&reach[j - 1]).copied().collect();
            if !shared.is_empty() {
                sets.insert((i, j), shared);
            }
        }
    }
    Ok(sets)
}

/// Decide whether a photon graph is exactly one cycle through all vertices
/// (every degree 2, connected, edge count = vertex count). When it is not,
/// any cycles shorter than the vertex count are reported; each such cycle
/// signals a lower-order collective phase contaminating the measurement.
pub fn pure_cycle_check(ge: &EDGraph) -> CycleVerdict {
    let n = ge.n();
    let offending = short_cycles(ge);
    let pure = n >= 3
        && ge.edges().len() == n
        && (1..=n).all(|v| ge.degree(v) == 2)
        && connected(ge);
    if !pure {
        return CycleVerdict { is_pure_cycle: false, cycle: None, offending_cycles: offending };
    }
    // Walk the unique cycle from vertex 1 toward its smaller neighbor.
    let mut cycle = vec![1usize];
    let first: usize = *ge.neighbors(1).iter().next().expect("degree 2");
    let mut prev = 1usize;
    let mut cur = first;
    while cur != 1 {
        cycle.push(cur);
        let next = *ge
            .neighbors(cur)
            .iter()
            .find(|&&w| w != prev)
            .expect("degree 2 gives one forward neighbor");
        prev = cur;
        cur = next;
    }
    CycleVerdict { is_pure_cycle: true, cycle: Some(cycle), offending_cycles: offending }
}

fn connected(g: &EDGraph) -> bool {
    let n = g.n();
    if n == 0 {
        return false;
    }
    let mut seen = vec![false; n + 1];
    let mut stack = vec![1usize];
    seen[1] = true;
    let mut count = 1;
    while let Some(v) = stack.pop() {
        for w in g.neighbors(v) {
            if !seen[w] {
                seen[w] = true;
                count += 1;
                stack.push(w);
            }
        }
    }
    count == n
}

/// Fundamental cycles of length < n from a BFS spanning forest, normalized
/// (minimum vertex first, oriented toward the smaller of its two cycle
/// neighbors) and deduplicated.
fn short_cycles(g: &EDGraph) -> Vec<Vec<usize>> {
    let n = g.n();
    let mut parent: Vec<Option<usize>> = vec![None; n + 1];
    let mut depth: Vec<usize> = vec![0; n + 1];
    let mut visited = vec![false; n + 1];
    let mut tree: BTreeSet<(usize, usize)> = BTreeSet::new();

    for root in 1..=n {
        if visited[root] {
            continue;
        }
        visited[root] = true;
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            for w in g.neighbors(v) {
                if !visited[w] {
                    visited[w] = true;
                    parent[w] = Some(v);
                    depth[w] = depth[v] + 1;
                    tree.insert((v.min(w), v.max(w)));
                    queue.push_back(w);
                }
            }
        }
    }

    let mut found: BTreeSet<Vec<usize>> = BTreeSet::new();
    for &(a, b) in g.edges() {
        if tree.contains(&(a, b)) {
            continue;
        }
        // Fundamental cycle of a non-tree edge: tree paths from both ends up
        // to their lowest common ancestor, closed by the edge itself.
        let (mut x, mut y) = (a, b);
        let mut path_x = vec![x];
        let mut path_y = vec![y];
        while depth[x] > depth[y] {
            x = parent[x].expect("deeper endpoint has a parent");
            path_x.push(x);
        }
        while depth[y] > depth[x] {
            y = parent[y].expect("deeper endpoint has a parent");
            path_y.push(y);
        }
        while x != y {
            x = parent[x].expect("distinct same-depth vertices both have parents");
            y = parent[y].expect("distinct same-depth vertices both have parents");
            path_x.push(x);
            path_y.push(y);
        }
        path_y.pop();
        let mut cycle = path_x;
        cycle.extend(path_y.into_iter().rev());
        if cycle.len() >= 3 && cycle.len() < n {
            found.insert(normalize_cycle(&cycle));
        }
    }
    let mut cycles: Vec<Vec<usize>> = found.into_iter().collect();
    cycles.sort_by_key(|c| (c.len(), c.clone()));
    cycles
}

fn normalize_cycle(cycle: &[usize]) -> Vec<usize> {
    let k = cycle.len();
    let (start, _) = cycle.iter().enumerate().min_by_key(|&(_, v)| v).expect("nonempty");
    let forward: Vec<usize> = (0..k).map(|i| cycle[(start + i) % k]).collect();
    let backward: Vec<usize> = (0..k).map(|i| cycle[(start + k - i) % k]).collect();
    if forward[1] <= backward[1] {
        forward
    } else {
        backward
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::validate_unitary;
    use crate::verifier::{fourier_matrix, haar_random_unitary};
    use nalgebra::DMatrix;
    use num_complex::Complex64 as C64;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    /// Block-diagonal pair of balanced two-port couplers on modes {1,2} and
    /// {3,4}: the smallest proper connectivity pattern with two components.
    fn two_coupler_unitary() -> ScatteringMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut m = DMatrix::from_element(4, 4, c(0.0, 0.0));
        for base in [0, 2] {
            m[(base, base)] = c(s, 0.0);
            m[(base, base + 1)] = c(s, 0.0);
            m[(base + 1, base)] = c(s, 0.0);
            m[(base + 1, base + 1)] = c(-s, 0.0);
        }
        validate_unitary(m, 1e-12).unwrap()
    }

    #[test]
    fn identity_gives_perfect_matching_and_empty_minor() {
        let u = validate_unitary(DMatrix::<C64>::identity(4, 4), 1e-12).unwrap();
        let gc = connectivity_graph(&u, DEFAULT_EDGE_THRESHOLD).unwrap();
        assert_eq!(gc.edges().len(), 4);
        for i in 1..=4 {
            assert!(gc.has_edge(i, i));
        }
        let minor = minor_graph(&gc);
        assert!(minor.edges().is_empty());

        let v = InputConfig::new(vec![1, 2, 3]).unwrap();
        assert!(output_sets(&gc, &v).unwrap().is_empty());
    }

    #[test]
    fn two_coupler_pattern_counts() {
        let gc = connectivity_graph(&two_coupler_unitary(), DEFAULT_EDGE_THRESHOLD).unwrap();
        assert_eq!(gc.edges().len(), 8);
        let minor = minor_graph(&gc);
        assert!(minor.has_edge(1, 2));
        assert!(minor.has_edge(3, 4));
        assert!(!minor.has_edge(1, 4));
        assert!(!minor.has_edge(1, 3));
        assert_eq!(minor.edges().len(), 2);

        // Photons on ports 1, 2, 3: only the first two can meet.
        let v = InputConfig::new(vec![1, 2, 3]).unwrap();
        let ge = enhanced_graph(&minor, &v).unwrap();
        assert_eq!(ge.edges().iter().copied().collect::<Vec<_>>(), vec![(1, 2)]);

        let sets = output_sets(&gc, &v).unwrap();
        assert_eq!(sets.len(), 1);
        assert_eq!(sets[&(1, 2)], BTreeSet::from([1, 2]));
    }

    #[test]
    fn dense_unitary_gives_complete_graphs() {
        let u = haar_random_unitary(4, 5);
        let gc = connectivity_graph(&u, DEFAULT_EDGE_THRESHOLD).unwrap();
        assert_eq!(gc.edges().len(), 16);
        let minor = minor_graph(&gc);
        assert_eq!(minor.edges().len(), 6);
        let v = InputConfig::new(vec![1, 2, 3, 4]).unwrap();
        let ge = enhanced_graph(&minor, &v).unwrap();
        assert_eq!(ge.edges().len(), 6);
        let verdict = pure_cycle_check(&ge);
        assert!(!verdict.is_pure_cycle);
        assert!(!verdict.offending_cycles.is_empty());
        assert_eq!(verdict.offending_cycles[0].len(), 3);
    }

    #[test]
    fn enhanced_edges_match_shared_row_predicate() {
        // Edge (i, j) iff columns v_i, v_j share a row with both entries
        // above threshold, checked directly against the matrix.
        for (mat, ports) in [
            (fourier_matrix(4), vec![1, 2, 3]),
            (two_coupler_unitary(), vec![1, 2, 4]),
            (haar_random_unitary(5, 77), vec![2, 3, 5]),
        ] {
            let v = InputConfig::new(ports).unwrap();
            let gc = connectivity_graph(&mat, DEFAULT_EDGE_THRESHOLD).unwrap();
            let ge = enhanced_graph(&minor_graph(&gc), &v).unwrap();
            for i in 1..=v.n() {
                for j in (i + 1)..=v.n() {
                    let share = (1..=mat.m()).any(|row| {
                        mat.entry(row, v.port_of(i)).norm() > DEFAULT_EDGE_THRESHOLD
                            && mat.entry(row, v.port_of(j)).norm() > DEFAULT_EDGE_THRESHOLD
                    });
                    assert_eq!(ge.has_edge(i, j), share, "pair ({i},{j})");
                }
            }
        }
    }

    #[test]
    fn pure_cycle_detects_cycles_and_contaminants() {
        let four_cycle = EDGraph::new(4, [(1, 2), (2, 4), (3, 4), (1, 3)]);
        let verdict = pure_cycle_check(&four_cycle);
        assert!(verdict.is_pure_cycle);
        assert_eq!(verdict.cycle, Some(vec![1, 2, 4, 3]));
        assert!(verdict.offending_cycles.is_empty());

        let triangle_plus_isolated = EDGraph::new(4, [(1, 2), (2, 3), (1, 3)]);
        let verdict = pure_cycle_check(&triangle_plus_isolated);
        assert!(!verdict.is_pure_cycle);
        assert_eq!(verdict.offending_cycles, vec![vec![1, 2, 3]]);

        let k4 = EDGraph::new(4, [(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)]);
        let verdict = pure_cycle_check(&k4);
        assert!(!verdict.is_pure_cycle);
        assert!(verdict.offending_cycles.iter().any(|c| c.len() == 3));

        let six_cycle = EDGraph::new(6, [(1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (1, 6)]);
        let verdict = pure_cycle_check(&six_cycle);
        assert!(verdict.is_pure_cycle);
        assert_eq!(verdict.cycle, Some(vec![1, 2, 3, 4, 5, 6]));

        // Two disjoint triangles: connected fails, both cycles reported.
        let two_triangles =
            EDGraph::new(6, [(1, 2), (2, 3), (1, 3), (4, 5), (5, 6), (4, 6)]);
        let verdict = pure_cycle_check(&two_triangles);
        assert!(!verdict.is_pure_cycle);
        assert_eq!(verdict.offending_cycles.len(), 2);
    }

    #[test]
    fn dot_output_is_deterministic_and_well_formed() {
        let gc = connectivity_graph(&two_coupler_unitary(), DEFAULT_EDGE_THRESHOLD).unwrap();
        let dot = gc.to_dot();
        assert_eq!(dot, gc.to_dot());
        assert!(dot.starts_with("graph connectivity {"));
        assert!(dot.contains("s1 -- d1;"));
        assert!(dot.matches(" -- ").count() == 8);
        assert!(dot.contains("style=dashed"));

        let ge = EDGraph::new(3, [(1, 2)]);
        let dot = ge.to_dot();
        assert!(dot.contains("layout=circo"));
        assert!(dot.contains("1 -- 2;"));
        assert!(dot.contains("3;"));

        let empty = EDGraph::new(2, []);
        assert!(empty.to_dot().contains("graph photons"));
    }

    #[test]
    fn threshold_must_be_positive() {
        let u = two_coupler_unitary();
        assert!(matches!(
            connectivity_graph(&u, 0.0),
            Err(GraphError::BadThreshold(_))
        ));
    }

    #[test]
    fn out_of_range_ports_are_rejected() {
        let gc = connectivity_graph(&two_coupler_unitary(), DEFAULT_EDGE_THRESHOLD).unwrap();
        let minor = minor_graph(&gc);
        let v = InputConfig::new(vec![1, 9]).unwrap();
        assert!(matches!(
            enhanced_graph(&minor, &v),
            Err(GraphError::PortOutOfRange { port: 9, .. })
        ));
        assert!(matches!(
            output_sets(&gc, &v),
            Err(GraphError::PortOutOfRange { port: 9, .. })
        ));
    }
}
