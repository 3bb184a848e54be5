//! Ship graph, pipe catalog, terminal groups and the installation cost.
//!
//! Vertices carry external labels (the room numbers used in instance files and
//! variable names) but are addressed by their 0-based position everywhere in
//! the crate. Pipe types are 0-based internally and reported 1-based.

use alloc::collections::BTreeSet;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::InstanceError;
use crate::unionfind::UnionFind;

/// 0-based vertex position.
pub type VertexIdx = usize;
/// 0-based position in [`Graph::edges`].
pub type EdgeIdx = usize;
/// 0-based pipe type; pipe type `p` is written `p + 1` externally.
pub type PipeIdx = usize;

/// Directed arc: both orientations of an edge. `2e` runs `u -> v` and
/// `2e + 1` runs `v -> u` for edge `e = (u, v)` with `u < v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ArcIdx(pub usize);

impl ArcIdx {
    pub fn new(edge: EdgeIdx, reversed: bool) -> Self {
        ArcIdx(2 * edge + reversed as usize)
    }

    pub fn edge(self) -> EdgeIdx {
        self.0 / 2
    }

    pub fn is_reversed(self) -> bool {
        self.0 % 2 == 1
    }

    pub fn reverse(self) -> Self {
        ArcIdx(self.0 ^ 1)
    }
}

/// Undirected simple graph with labelled vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    labels: Vec<u32>,
    edges: Vec<(VertexIdx, VertexIdx)>,
    incident: Vec<Vec<EdgeIdx>>,
}

impl Graph {
    /// Graph on vertices labelled `1..=num_vertices`. Edges are given by label
    /// and stored with their endpoints ordered.
    pub fn new(num_vertices: usize, edges: impl IntoIterator<Item = (u32, u32)>) -> Result<Self, InstanceError> {
        let labels = (1..=num_vertices as u32).collect();
        Self::with_labels(labels, edges)
    }

    /// Graph whose vertex `i` carries `labels[i]`. Labels must be positive and
    /// strictly increasing so that index order and label order agree.
    pub fn with_labels(labels: Vec<u32>, edges: impl IntoIterator<Item = (u32, u32)>) -> Result<Self, InstanceError> {
        if labels.first().is_some_and(|&l| l == 0) || labels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(InstanceError::BadLabels);
        }
        let mut graph = Graph { incident: vec![Vec::new(); labels.len()], labels, edges: Vec::new() };
        let mut seen = BTreeSet::new();
        for (a, b) in edges {
            let u = graph.index_of(a).ok_or(InstanceError::UnknownVertex(a))?;
            let v = graph.index_of(b).ok_or(InstanceError::UnknownVertex(b))?;
            if u == v {
                return Err(InstanceError::SelfLoop(a));
            }
            let (u, v) = if u < v { (u, v) } else { (v, u) };
            if !seen.insert((u, v)) {
                return Err(InstanceError::DuplicateEdge(graph.labels[u], graph.labels[v]));
            }
            let e = graph.edges.len();
            graph.edges.push((u, v));
            graph.incident[u].push(e);
            graph.incident[v].push(e);
        }
        Ok(graph)
    }

    pub fn num_vertices(&self) -> usize {
        self.labels.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_arcs(&self) -> usize {
        2 * self.edges.len()
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn label(&self, v: VertexIdx) -> u32 {
        self.labels[v]
    }

    pub fn index_of(&self, label: u32) -> Option<VertexIdx> {
        self.labels.binary_search(&label).ok()
    }

    pub fn edges(&self) -> &[(VertexIdx, VertexIdx)] {
        &self.edges
    }

    pub fn edge(&self, e: EdgeIdx) -> (VertexIdx, VertexIdx) {
        self.edges[e]
    }

    pub fn edge_labels(&self, e: EdgeIdx) -> (u32, u32) {
        let (u, v) = self.edges[e];
        (self.labels[u], self.labels[v])
    }

    /// Edge between two labelled vertices, in either order.
    pub fn find_edge(&self, a: u32, b: u32) -> Option<EdgeIdx> {
        let u = self.index_of(a)?;
        let v = self.index_of(b)?;
        self.incident[u].iter().copied().find(|&e| self.other(e, u) == v)
    }

    pub fn incident(&self, v: VertexIdx) -> &[EdgeIdx] {
        &self.incident[v]
    }

    pub fn other(&self, e: EdgeIdx, v: VertexIdx) -> VertexIdx {
        let (a, b) = self.edges[e];
        if a == v {
            b
        } else {
            a
        }
    }

    /// `(tail, head)` of an arc.
    pub fn arc(&self, a: ArcIdx) -> (VertexIdx, VertexIdx) {
        let (u, v) = self.edges[a.edge()];
        if a.is_reversed() {
            (v, u)
        } else {
            (u, v)
        }
    }

    pub fn arc_labels(&self, a: ArcIdx) -> (u32, u32) {
        let (t, h) = self.arc(a);
        (self.labels[t], self.labels[h])
    }

    /// Arcs leaving `v`.
    pub fn out_arcs(&self, v: VertexIdx) -> impl Iterator<Item = ArcIdx> + '_ {
        self.incident[v].iter().map(move |&e| ArcIdx::new(e, self.edges[e].0 != v))
    }

    /// Arcs entering `v`.
    pub fn in_arcs(&self, v: VertexIdx) -> impl Iterator<Item = ArcIdx> + '_ {
        self.out_arcs(v).map(ArcIdx::reverse)
    }
}

/// Pipe types and their base installation costs `γ_puv`.
#[derive(Debug, Clone, PartialEq)]
pub struct PipeCatalog {
    num_types: usize,
    num_edges: usize,
    // row-major by pipe: costs[p * num_edges + e]
    costs: Vec<f64>,
}

impl PipeCatalog {
    /// One row per edge holding the cost of every pipe type on that edge.
    pub fn from_per_edge(num_types: usize, per_edge: &[Vec<f64>]) -> Result<Self, InstanceError> {
        if num_types == 0 {
            return Err(InstanceError::NoPipeTypes);
        }
        let num_edges = per_edge.len();
        let mut costs = vec![0.0; num_types * num_edges];
        for (e, row) in per_edge.iter().enumerate() {
            if row.len() != num_types {
                return Err(InstanceError::CostRowLength { edge: e, expected: num_types, found: row.len() });
            }
            for (p, &c) in row.iter().enumerate() {
                costs[p * num_edges + e] = c;
            }
        }
        let catalog = PipeCatalog { num_types, num_edges, costs };
        catalog.check_positive()?;
        Ok(catalog)
    }

    /// `γ_puv = ratios[p] · base[e]`, e.g. double-walled pipes at twice the
    /// single-walled cost.
    pub fn scaled(base: &[f64], ratios: &[f64]) -> Result<Self, InstanceError> {
        if ratios.is_empty() {
            return Err(InstanceError::NoPipeTypes);
        }
        let costs = ratios.iter().flat_map(|&r| base.iter().map(move |&b| r * b)).collect();
        let catalog = PipeCatalog { num_types: ratios.len(), num_edges: base.len(), costs };
        catalog.check_positive()?;
        Ok(catalog)
    }

    fn check_positive(&self) -> Result<(), InstanceError> {
        for p in 0..self.num_types {
            for e in 0..self.num_edges {
                let c = self.cost(p, e);
                if !(c > 0.0 && c.is_finite()) {
                    return Err(InstanceError::NonPositiveCost { pipe: p + 1, edge: e, value: c });
                }
            }
        }
        Ok(())
    }

    pub fn num_types(&self) -> usize {
        self.num_types
    }

    pub fn num_edges(&self) -> usize {
        self.num_edges
    }

    pub fn cost(&self, p: PipeIdx, e: EdgeIdx) -> f64 {
        self.costs[p * self.num_edges + e]
    }

    /// Per-edge rows, the layout of the instance file.
    pub fn per_edge(&self) -> Vec<Vec<f64>> {
        (0..self.num_edges).map(|e| (0..self.num_types).map(|p| self.cost(p, e)).collect()).collect()
    }
}

/// Pairwise disjoint terminal groups with one root per group.
///
/// The root of a group is its smallest vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TerminalGroups {
    groups: Vec<Vec<VertexIdx>>,
    group_of: Vec<Option<usize>>,
}

impl TerminalGroups {
    pub fn new(num_vertices: usize, groups: Vec<Vec<VertexIdx>>) -> Result<Self, InstanceError> {
        if groups.is_empty() {
            return Err(InstanceError::NoGroups);
        }
        let mut group_of = vec![None; num_vertices];
        let mut sorted = Vec::with_capacity(groups.len());
        for (k, mut group) in groups.into_iter().enumerate() {
            group.sort_unstable();
            group.dedup();
            if group.len() < 2 {
                return Err(InstanceError::SmallGroup(k + 1));
            }
            for &t in &group {
                let slot = group_of.get_mut(t).ok_or(InstanceError::VertexOutOfRange(t))?;
                if slot.is_some() {
                    return Err(InstanceError::OverlappingGroups(t));
                }
                *slot = Some(k);
            }
            sorted.push(group);
        }
        Ok(TerminalGroups { groups: sorted, group_of })
    }

    /// Number of groups `K`.
    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn group(&self, k: usize) -> &[VertexIdx] {
        &self.groups[k]
    }

    pub fn groups(&self) -> &[Vec<VertexIdx>] {
        &self.groups
    }

    pub fn root(&self, k: usize) -> VertexIdx {
        self.groups[k][0]
    }

    /// `τ(t)`: the group containing `t`, if `t` is a terminal.
    pub fn group_of(&self, v: VertexIdx) -> Option<usize> {
        self.group_of.get(v).copied().flatten()
    }

    pub fn is_terminal(&self, v: VertexIdx) -> bool {
        self.group_of(v).is_some()
    }

    pub fn is_root(&self, v: VertexIdx) -> bool {
        self.group_of(v).is_some_and(|k| self.root(k) == v)
    }

    pub fn num_terminals(&self) -> usize {
        self.groups.iter().map(Vec::len).sum()
    }

    /// Terminals that are not roots, group by group.
    pub fn non_roots(&self) -> impl Iterator<Item = VertexIdx> + '_ {
        self.groups.iter().flat_map(|g| g[1..].iter().copied())
    }

    /// Terminals of groups `k..K` except the root of group `k`.
    pub fn tail_without_root(&self, k: usize) -> impl Iterator<Item = VertexIdx> + '_ {
        self.groups[k..].iter().flatten().copied().filter(move |&t| t != self.root(k))
    }

    /// Terminals of groups `0..k`.
    pub fn head(&self, k: usize) -> impl Iterator<Item = VertexIdx> + '_ {
        self.groups[..k].iter().flatten().copied()
    }
}

/// One stage or scenario of the routing problem.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    graph: Arc<Graph>,
    pipes: Arc<PipeCatalog>,
    terminals: TerminalGroups,
    feasible_pipes: Vec<bool>,
    admissible_edges: Vec<bool>,
    multiplier: f64,
}

impl Instance {
    /// Builds and validates an instance. Every group must be connected through
    /// admissible edges.
    pub fn new(
        graph: Arc<Graph>,
        pipes: Arc<PipeCatalog>,
        terminals: TerminalGroups,
        feasible_pipes: &[PipeIdx],
        admissible_edges: &[EdgeIdx],
        multiplier: f64,
    ) -> Result<Self, InstanceError> {
        if pipes.num_edges() != graph.num_edges() {
            return Err(InstanceError::CatalogMismatch { edges: graph.num_edges(), costed: pipes.num_edges() });
        }
        if terminals.group_of.len() != graph.num_vertices() {
            return Err(InstanceError::VertexOutOfRange(terminals.group_of.len()));
        }
        if !(multiplier >= 1.0 && multiplier.is_finite()) {
            return Err(InstanceError::BadMultiplier(multiplier));
        }
        let mut feasible = vec![false; pipes.num_types()];
        for &p in feasible_pipes {
            *feasible.get_mut(p).ok_or(InstanceError::PipeOutOfRange(p + 1))? = true;
        }
        if !feasible.iter().any(|&b| b) {
            return Err(InstanceError::NoFeasiblePipes);
        }
        let mut admissible = vec![false; graph.num_edges()];
        for &e in admissible_edges {
            *admissible.get_mut(e).ok_or(InstanceError::EdgeOutOfRange(e))? = true;
        }
        if !admissible.iter().any(|&b| b) {
            return Err(InstanceError::NoAdmissibleEdges);
        }
        let instance =
            Instance { graph, pipes, terminals, feasible_pipes: feasible, admissible_edges: admissible, multiplier };
        for k in 0..instance.terminals.len() {
            if !instance.is_connected_within(k)? {
                return Err(InstanceError::DisconnectedGroup(k + 1));
            }
        }
        Ok(instance)
    }

    pub fn graph(&self) -> &Arc<Graph> {
        &self.graph
    }

    pub fn pipes(&self) -> &Arc<PipeCatalog> {
        &self.pipes
    }

    pub fn terminals(&self) -> &TerminalGroups {
        &self.terminals
    }

    pub fn multiplier(&self) -> f64 {
        self.multiplier
    }

    pub fn num_pipe_types(&self) -> usize {
        self.pipes.num_types()
    }

    /// Installation cost of `p` on `e` in this stage.
    pub fn cost(&self, p: PipeIdx, e: EdgeIdx) -> f64 {
        self.multiplier * self.pipes.cost(p, e)
    }

    pub fn is_feasible_pipe(&self, p: PipeIdx) -> bool {
        self.feasible_pipes.get(p).copied().unwrap_or(false)
    }

    pub fn is_admissible(&self, e: EdgeIdx) -> bool {
        self.admissible_edges.get(e).copied().unwrap_or(false)
    }

    pub fn feasible_pipes(&self) -> impl Iterator<Item = PipeIdx> + '_ {
        (0..self.feasible_pipes.len()).filter(|&p| self.feasible_pipes[p])
    }

    pub fn admissible_edges(&self) -> impl Iterator<Item = EdgeIdx> + '_ {
        (0..self.admissible_edges.len()).filter(|&e| self.admissible_edges[e])
    }

    pub fn admissible_mask(&self) -> &[bool] {
        &self.admissible_edges
    }

    pub fn num_feasible_pipes(&self) -> usize {
        self.feasible_pipes.iter().filter(|&&b| b).count()
    }

    pub fn num_admissible_edges(&self) -> usize {
        self.admissible_edges.iter().filter(|&&b| b).count()
    }

    /// Whether the terminals of group `k` are connected in `(V, 𝔈)`.
    pub fn is_connected_within(&self, k: usize) -> Result<bool, InstanceError> {
        if k >= self.terminals.len() {
            return Err(InstanceError::GroupOutOfRange(k + 1));
        }
        Ok(group_connected(&self.graph, &self.admissible_edges, self.terminals.group(k)))
    }

    /// Same stage with another cost multiplier.
    pub fn with_multiplier(&self, multiplier: f64) -> Result<Self, InstanceError> {
        if !(multiplier >= 1.0 && multiplier.is_finite()) {
            return Err(InstanceError::BadMultiplier(multiplier));
        }
        let mut out = self.clone();
        out.multiplier = multiplier;
        Ok(out)
    }
}

/// Whether all vertices of `group` lie in one component of the subgraph of
/// edges flagged in `edge_mask`. A group with fewer than two vertices is
/// trivially connected.
pub fn group_connected(graph: &Graph, edge_mask: &[bool], group: &[VertexIdx]) -> bool {
    let Some((&first, rest)) = group.split_first() else {
        return true;
    };
    let mut uf = UnionFind::new(graph.num_vertices());
    for (e, &(u, v)) in graph.edges().iter().enumerate() {
        if edge_mask.get(e).copied().unwrap_or(false) {
            uf.union(u, v);
        }
    }
    rest.iter().all(|&t| uf.same(first, t))
}

/// A set of `(pipe, edge)` installations.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct EdgePipeSet(BTreeSet<(PipeIdx, EdgeIdx)>);

impl EdgePipeSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, p: PipeIdx, e: EdgeIdx) -> bool {
        self.0.insert((p, e))
    }

    pub fn remove(&mut self, p: PipeIdx, e: EdgeIdx) -> bool {
        self.0.remove(&(p, e))
    }

    pub fn contains(&self, p: PipeIdx, e: EdgeIdx) -> bool {
        self.0.contains(&(p, e))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (PipeIdx, EdgeIdx)> + '_ {
        self.0.iter().copied()
    }

    pub fn union(&self, other: &EdgePipeSet) -> EdgePipeSet {
        EdgePipeSet(self.0.union(&other.0).copied().collect())
    }

    pub fn difference(&self, other: &EdgePipeSet) -> EdgePipeSet {
        EdgePipeSet(self.0.difference(&other.0).copied().collect())
    }

    pub fn intersection(&self, other: &EdgePipeSet) -> EdgePipeSet {
        EdgePipeSet(self.0.intersection(&other.0).copied().collect())
    }

    /// Checks all ids against a catalog and graph.
    pub fn check(&self, num_pipe_types: usize, num_edges: usize) -> Result<(), InstanceError> {
        for (p, e) in self.iter() {
            if p >= num_pipe_types {
                return Err(InstanceError::PipeOutOfRange(p + 1));
            }
            if e >= num_edges {
                return Err(InstanceError::EdgeOutOfRange(e));
            }
        }
        Ok(())
    }
}

impl FromIterator<(PipeIdx, EdgeIdx)> for EdgePipeSet {
    fn from_iter<I: IntoIterator<Item = (PipeIdx, EdgeIdx)>>(iter: I) -> Self {
        EdgePipeSet(iter.into_iter().collect())
    }
}

impl Extend<(PipeIdx, EdgeIdx)> for EdgePipeSet {
    fn extend<I: IntoIterator<Item = (PipeIdx, EdgeIdx)>>(&mut self, iter: I) {
        self.0.extend(iter)
    }
}

/// First stage plus second-stage scenarios on a shared graph and catalog.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoStageInstance {
    first_stage: Instance,
    scenarios: Vec<Instance>,
    probabilities: Vec<f64>,
    existing: EdgePipeSet,
}

/// Tolerance on `Σ ρ = 1`.
pub const PROBABILITY_TOLERANCE: f64 = 1e-12;

impl TwoStageInstance {
    pub fn new(
        first_stage: Instance,
        scenarios: Vec<Instance>,
        probabilities: Vec<f64>,
        existing: EdgePipeSet,
    ) -> Result<Self, InstanceError> {
        if scenarios.is_empty() {
            return Err(InstanceError::NoScenarios);
        }
        for (s, scenario) in scenarios.iter().enumerate() {
            let same_graph = Arc::ptr_eq(&scenario.graph, &first_stage.graph) || scenario.graph == first_stage.graph;
            let same_pipes = Arc::ptr_eq(&scenario.pipes, &first_stage.pipes) || scenario.pipes == first_stage.pipes;
            if !same_graph || !same_pipes {
                return Err(InstanceError::ForeignScenario(s + 1));
            }
            if scenario.multiplier.is_nan() || scenario.multiplier <= 1.0 {
                return Err(InstanceError::ScenarioMultiplier { scenario: s + 1, value: scenario.multiplier });
            }
        }
        existing.check(first_stage.num_pipe_types(), first_stage.graph.num_edges())?;
        let mut out = TwoStageInstance { first_stage, scenarios, probabilities: Vec::new(), existing };
        out.set_probabilities(probabilities)?;
        Ok(out)
    }

    fn set_probabilities(&mut self, probabilities: Vec<f64>) -> Result<(), InstanceError> {
        if probabilities.len() != self.scenarios.len() {
            return Err(InstanceError::BadProbabilities);
        }
        let sum: f64 = probabilities.iter().sum();
        if probabilities.iter().any(|&p| p.is_nan() || p < 0.0) || (sum - 1.0).abs() > PROBABILITY_TOLERANCE {
            return Err(InstanceError::BadProbabilities);
        }
        self.probabilities = probabilities;
        Ok(())
    }

    /// Same instance under another scenario distribution.
    pub fn with_probabilities(&self, probabilities: Vec<f64>) -> Result<Self, InstanceError> {
        let mut out = self.clone();
        out.set_probabilities(probabilities)?;
        Ok(out)
    }

    /// Two-scenario shorthand: `ρ = (1 − ρ₂, ρ₂)`.
    pub fn with_rho2(&self, rho2: f64) -> Result<Self, InstanceError> {
        if self.scenarios.len() != 2 || !(0.0..=1.0).contains(&rho2) {
            return Err(InstanceError::BadProbabilities);
        }
        self.with_probabilities(vec![1.0 - rho2, rho2])
    }

    pub fn first_stage(&self) -> &Instance {
        &self.first_stage
    }

    pub fn scenarios(&self) -> &[Instance] {
        &self.scenarios
    }

    pub fn scenario(&self, s: usize) -> &Instance {
        &self.scenarios[s]
    }

    pub fn num_scenarios(&self) -> usize {
        self.scenarios.len()
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn existing(&self) -> &EdgePipeSet {
        &self.existing
    }

    pub fn graph(&self) -> &Arc<Graph> {
        self.first_stage.graph()
    }

    pub fn pipes(&self) -> &Arc<PipeCatalog> {
        self.first_stage.pipes()
    }
}

/// Cost of installing `solution` on top of `existing`: pairs already present
/// are free, every other pair is charged `multiplier · γ_puv`.
pub fn cost(instance: &Instance, existing: &EdgePipeSet, solution: &EdgePipeSet) -> Result<f64, InstanceError> {
    let (types, edges) = (instance.num_pipe_types(), instance.graph.num_edges());
    existing.check(types, edges)?;
    solution.check(types, edges)?;
    Ok(solution.iter().filter(|&(p, e)| !existing.contains(p, e)).map(|(p, e)| instance.cost(p, e)).sum())
}

/// Outcome of [`validate_feasible`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Feasibility {
    /// 1-based indices of groups whose terminals are not connected.
    pub disconnected_groups: Vec<usize>,
}

impl Feasibility {
    pub fn is_feasible(&self) -> bool {
        self.disconnected_groups.is_empty()
    }
}

/// Checks that every terminal group is connected by the pairs of `solution`
/// that use a feasible pipe on an admissible edge. Other pairs may be
/// installed but do not carry the connection.
pub fn validate_feasible(instance: &Instance, solution: &EdgePipeSet) -> Result<Feasibility, InstanceError> {
    let graph = instance.graph();
    solution.check(instance.num_pipe_types(), graph.num_edges())?;
    let mut uf = UnionFind::new(graph.num_vertices());
    for (p, e) in solution.iter() {
        if instance.is_feasible_pipe(p) && instance.is_admissible(e) {
            let (u, v) = graph.edge(e);
            uf.union(u, v);
        }
    }
    let terminals = instance.terminals();
    let disconnected_groups = (0..terminals.len())
        .filter(|&k| {
            let group = terminals.group(k);
            group[1..].iter().any(|&t| !uf.same(group[0], t))
        })
        .map(|k| k + 1)
        .collect();
    Ok(Feasibility { disconnected_groups })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> Instance {
        let graph = Arc::new(Graph::new(3, [(1, 2), (2, 3)]).unwrap());
        let pipes = Arc::new(PipeCatalog::scaled(&[1.0, 3.0], &[1.0, 2.0]).unwrap());
        let terminals = TerminalGroups::new(3, vec![vec![0, 2]]).unwrap();
        Instance::new(graph, pipes, terminals, &[0, 1], &[0, 1], 1.0).unwrap()
    }

    #[test]
    fn arcs_are_both_orientations() {
        let g = Graph::new(3, [(2, 1), (2, 3)]).unwrap();
        assert_eq!(g.edge(0), (0, 1));
        assert_eq!(g.num_arcs(), 4);
        assert_eq!(g.arc(ArcIdx(1)), (1, 0));
        let into_b: Vec<_> = g.in_arcs(1).map(|a| g.arc(a)).collect();
        assert_eq!(into_b, vec![(0, 1), (2, 1)]);
    }

    #[test]
    fn graph_rejects_bad_edges() {
        assert_eq!(Graph::new(3, [(1, 1)]), Err(InstanceError::SelfLoop(1)));
        assert_eq!(Graph::new(3, [(1, 2), (2, 1)]), Err(InstanceError::DuplicateEdge(1, 2)));
        assert_eq!(Graph::new(3, [(1, 4)]), Err(InstanceError::UnknownVertex(4)));
        assert_eq!(Graph::with_labels(vec![2, 1], []), Err(InstanceError::BadLabels));
    }

    #[test]
    fn groups_validation() {
        assert_eq!(TerminalGroups::new(4, vec![vec![1]]), Err(InstanceError::SmallGroup(1)));
        assert_eq!(TerminalGroups::new(4, vec![vec![0, 1], vec![1, 2]]), Err(InstanceError::OverlappingGroups(1)));
        let g = TerminalGroups::new(5, vec![vec![3, 1], vec![4, 0]]).unwrap();
        assert_eq!(g.root(0), 1);
        assert_eq!(g.root(1), 0);
        assert_eq!(g.group_of(3), Some(0));
        assert_eq!(g.group_of(2), None);
        assert_eq!(g.tail_without_root(0).collect::<Vec<_>>(), vec![3, 0, 4]);
        assert_eq!(g.head(1).collect::<Vec<_>>(), vec![1, 3]);
    }

    #[test]
    fn cost_charges_only_new_pairs() {
        let inst = path3();
        let empty = EdgePipeSet::new();
        assert_eq!(cost(&inst, &empty, &empty).unwrap(), 0.0);
        let sol: EdgePipeSet = [(0, 0), (1, 1)].into_iter().collect();
        assert_eq!(cost(&inst, &empty, &sol).unwrap(), 1.0 + 6.0);
        let existing: EdgePipeSet = [(1, 1)].into_iter().collect();
        assert_eq!(cost(&inst, &existing, &sol).unwrap(), 1.0);
        let bad: EdgePipeSet = [(2, 0)].into_iter().collect();
        assert_eq!(cost(&inst, &empty, &bad), Err(InstanceError::PipeOutOfRange(3)));
    }

    #[test]
    fn validator_ignores_infeasible_pipes() {
        let graph = Arc::new(Graph::new(3, [(1, 2), (2, 3)]).unwrap());
        let pipes = Arc::new(PipeCatalog::scaled(&[1.0, 1.0], &[1.0, 2.0]).unwrap());
        let terminals = TerminalGroups::new(3, vec![vec![0, 2]]).unwrap();
        let inst = Instance::new(graph, pipes, terminals, &[1], &[0, 1], 1.0).unwrap();
        let single: EdgePipeSet = [(0, 0), (0, 1)].into_iter().collect();
        assert_eq!(validate_feasible(&inst, &single).unwrap().disconnected_groups, vec![1]);
        let double: EdgePipeSet = [(1, 0), (1, 1)].into_iter().collect();
        assert!(validate_feasible(&inst, &double).unwrap().is_feasible());
        assert!(!validate_feasible(&inst, &EdgePipeSet::new()).unwrap().is_feasible());
    }

    #[test]
    fn instance_rejects_disconnected_group() {
        let graph = Arc::new(Graph::new(3, [(1, 2), (2, 3)]).unwrap());
        let pipes = Arc::new(PipeCatalog::scaled(&[1.0, 1.0], &[1.0]).unwrap());
        let terminals = TerminalGroups::new(3, vec![vec![0, 2]]).unwrap();
        let err = Instance::new(graph, pipes, terminals, &[0], &[0], 1.0).unwrap_err();
        assert_eq!(err, InstanceError::DisconnectedGroup(1));
    }

    #[test]
    fn connectivity_edge_cases() {
        let g = Graph::new(3, [(1, 2), (2, 3)]).unwrap();
        assert!(!group_connected(&g, &[false, false], &[0, 2]));
        assert!(group_connected(&g, &[false, false], &[1]));
        assert!(group_connected(&g, &[true, true], &[0, 2]));
        let inst = path3();
        assert_eq!(inst.is_connected_within(0), Ok(true));
        assert_eq!(inst.is_connected_within(1), Err(InstanceError::GroupOutOfRange(2)));
    }

    #[test]
    fn probabilities_must_sum_to_one() {
        let inst = path3();
        let scen = inst.with_multiplier(2.0).unwrap();
        let two =
            |p: Vec<f64>| TwoStageInstance::new(inst.clone(), vec![scen.clone(), scen.clone()], p, EdgePipeSet::new());
        assert!(two(vec![0.5, 0.5]).is_ok());
        assert_eq!(two(vec![0.5, 0.6]).unwrap_err(), InstanceError::BadProbabilities);
        assert_eq!(two(vec![-0.5, 1.5]).unwrap_err(), InstanceError::BadProbabilities);
        let flat = TwoStageInstance::new(inst.clone(), vec![inst.clone()], vec![1.0], EdgePipeSet::new());
        assert!(matches!(flat, Err(InstanceError::ScenarioMultiplier { .. })));
    }
}
