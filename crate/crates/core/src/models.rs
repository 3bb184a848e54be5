//! The six routing models: deterministic, robust and stochastic objectives,
//! each over an undirected or a directed multicommodity-flow formulation.
//!
//! Variable names encode their indices with vertex labels and 1-based pipe
//! and group numbers:
//!
//! | variable            | name                     |
//! |---------------------|--------------------------|
//! | installation        | `x_{p}_{u}_{v}`          |
//! | undirected flow     | `f_{t}_{p}_{u}_{v}`      |
//! | directed flow       | `fD_{k}_{t}_{p}_{u}_{v}` |
//! | arborescence arc    | `yk_{k}_{p}_{u}_{v}`     |
//! | used arc            | `y_{p}_{u}_{v}`          |
//! | root assignment     | `z_{k}_{l}`              |
//! | worst-case retrofit | `d`                      |
//!
//! Second-stage copies carry an `_s{s}` suffix. Installation variables and
//! the arc variables `y`, `yk` are continuous on `[0, 1]`: integral flows force
//! them integral at any optimum.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::ModelError;
use crate::graph::{ArcIdx, EdgeIdx, EdgePipeSet, Instance, PipeIdx, TwoStageInstance, VertexIdx};
use crate::milp::{MilpModel, Sense, VarId};

/// Objective type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Optimization {
    Deterministic,
    Robust,
    Stochastic,
}

/// Flow formulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Flow {
    Undirected,
    Directed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModelKind {
    pub optimization: Optimization,
    pub flow: Flow,
}

impl ModelKind {
    pub const ALL: [ModelKind; 6] = [
        ModelKind::new(Optimization::Deterministic, Flow::Undirected),
        ModelKind::new(Optimization::Deterministic, Flow::Directed),
        ModelKind::new(Optimization::Robust, Flow::Undirected),
        ModelKind::new(Optimization::Robust, Flow::Directed),
        ModelKind::new(Optimization::Stochastic, Flow::Undirected),
        ModelKind::new(Optimization::Stochastic, Flow::Directed),
    ];

    pub const fn new(optimization: Optimization, flow: Flow) -> Self {
        ModelKind { optimization, flow }
    }
}

impl fmt::Display for Optimization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Optimization::Deterministic => "DO",
            Optimization::Robust => "RO",
            Optimization::Stochastic => "SO",
        })
    }
}

impl fmt::Display for Flow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Flow::Undirected => "U",
            Flow::Directed => "D",
        })
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.optimization, self.flow)
    }
}

/// First stage or second-stage scenario (0-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Stage {
    First,
    Scenario(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SizeStats {
    pub variables: usize,
    pub constraints: usize,
}

/// Installations read back from a solution vector.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct StagePairs {
    /// First-stage pipes, pre-existing pairs included.
    pub first: EdgePipeSet,
    /// Everything installed once scenario `s` is realised (a superset of
    /// `first`).
    pub scenarios: Vec<EdgePipeSet>,
}

/// A model ready for a solver, plus the maps needed to read a solution.
#[derive(Debug, Clone)]
pub struct BuiltModel {
    pub milp: MilpModel,
    pub kind: ModelKind,
    pub stats: SizeStats,
    num_edges: usize,
    num_pipes: usize,
    /// x variables per stage, indexed `p * |E| + e`.
    installs: Vec<Vec<VarId>>,
    implied_integral: Vec<VarId>,
    retrofit: Option<VarId>,
}

impl BuiltModel {
    fn finish(mut self) -> Self {
        self.stats = SizeStats { variables: self.milp.num_variables(), constraints: self.milp.num_constraints() };
        self
    }

    pub fn num_stages(&self) -> usize {
        self.installs.len()
    }

    /// The installation variable of `(p, e)` in `stage`.
    pub fn install_var(&self, stage: Stage, p: PipeIdx, e: EdgeIdx) -> VarId {
        let block = match stage {
            Stage::First => 0,
            Stage::Scenario(s) => s + 1,
        };
        self.installs[block][p * self.num_edges + e]
    }

    /// Every installation variable with its stage, pipe and edge.
    pub fn installs(&self) -> impl Iterator<Item = (Stage, PipeIdx, EdgeIdx, VarId)> + '_ {
        self.installs.iter().enumerate().flat_map(move |(block, vars)| {
            let stage = if block == 0 { Stage::First } else { Stage::Scenario(block - 1) };
            vars.iter().enumerate().map(move |(i, &v)| (stage, i / self.num_edges, i % self.num_edges, v))
        })
    }

    /// Continuous variables that take 0/1 values at every optimum.
    pub fn implied_integral(&self) -> &[VarId] {
        &self.implied_integral
    }

    /// The worst-case retrofit variable `d` of robust models.
    pub fn retrofit_var(&self) -> Option<VarId> {
        self.retrofit
    }

    /// Pairs whose installation variable exceeds one half.
    pub fn extract(&self, values: &[f64]) -> StagePairs {
        let read = |block: &[VarId]| -> EdgePipeSet {
            block
                .iter()
                .enumerate()
                .filter(|&(_, v)| values[v.0] > 0.5)
                .map(|(i, _)| (i / self.num_edges, i % self.num_edges))
                .collect()
        };
        StagePairs { first: read(&self.installs[0]), scenarios: self.installs[1..].iter().map(|b| read(b)).collect() }
    }

    pub fn num_pipe_types(&self) -> usize {
        self.num_pipes
    }
}

struct Names<'a> {
    inst: &'a Instance,
    suffix: String,
}

impl Names<'_> {
    fn v(&self, v: VertexIdx) -> u32 {
        self.inst.graph().label(v)
    }

    fn arc(&self, a: ArcIdx) -> (u32, u32) {
        self.inst.graph().arc_labels(a)
    }
}

/// Adds the `x` block of a stage; pairs in `fixed` are pinned to 1.
fn add_installs(
    model: &mut MilpModel,
    inst: &Instance,
    suffix: &str,
    fixed: Option<&EdgePipeSet>,
) -> Result<Vec<VarId>, ModelError> {
    let graph = inst.graph();
    let mut x = Vec::with_capacity(inst.num_pipe_types() * graph.num_edges());
    for p in 0..inst.num_pipe_types() {
        for e in 0..graph.num_edges() {
            let (u, v) = graph.edge_labels(e);
            let pinned = fixed.is_some_and(|s| s.contains(p, e));
            let lower = if pinned { 1.0 } else { 0.0 };
            x.push(model.add_continuous(format!("x_{}_{u}_{v}{suffix}", p + 1), lower, 1.0, 0.0)?);
        }
    }
    Ok(x)
}

fn admissible_arcs(inst: &Instance) -> Vec<ArcIdx> {
    inst.admissible_edges().flat_map(|e| [ArcIdx::new(e, false), ArcIdx::new(e, true)]).collect()
}

/// Arc-indexed variable table for one commodity and pipe.
type ArcVars = Vec<Option<VarId>>;

fn in_terms<'a>(
    inst: &'a Instance,
    tables: &'a [ArcVars],
    v: VertexIdx,
    sign: f64,
) -> impl Iterator<Item = (VarId, f64)> + 'a {
    tables.iter().flat_map(move |table| inst.graph().in_arcs(v).filter_map(move |a| table[a.0].map(|var| (var, sign))))
}

fn out_terms<'a>(
    inst: &'a Instance,
    tables: &'a [ArcVars],
    v: VertexIdx,
    sign: f64,
) -> impl Iterator<Item = (VarId, f64)> + 'a {
    tables.iter().flat_map(move |table| inst.graph().out_arcs(v).filter_map(move |a| table[a.0].map(|var| (var, sign))))
}

/// Undirected formulation of one stage on top of its `x` block.
fn add_undirected_stage(model: &mut MilpModel, inst: &Instance, x: &[VarId], suffix: &str) -> Result<(), ModelError> {
    let graph = inst.graph();
    let names = Names { inst, suffix: suffix.into() };
    let sfx = &names.suffix;
    let arcs = admissible_arcs(inst);
    let pipes: Vec<PipeIdx> = inst.feasible_pipes().collect();
    let terminals = inst.terminals();
    let sinks: Vec<VertexIdx> = terminals.non_roots().collect();

    // flows[t][p] is indexed by arc
    let mut flows: Vec<Vec<ArcVars>> = Vec::with_capacity(sinks.len());
    for &t in &sinks {
        let mut per_pipe = Vec::with_capacity(pipes.len());
        for &p in &pipes {
            let mut table = vec![None; graph.num_arcs()];
            for &a in &arcs {
                let (u, v) = names.arc(a);
                let name = format!("f_{}_{}_{u}_{v}{sfx}", names.v(t), p + 1);
                table[a.0] = Some(model.add_binary(name, 0.0)?);
            }
            per_pipe.push(table);
        }
        flows.push(per_pipe);
    }

    for (ti, &t) in sinks.iter().enumerate() {
        let root = terminals.root(terminals.group_of(t).expect("sink is a terminal"));
        for v in 0..graph.num_vertices() {
            let rhs = if v == root {
                1.0
            } else if v == t {
                -1.0
            } else {
                0.0
            };
            let terms: Vec<_> =
                out_terms(inst, &flows[ti], v, 1.0).chain(in_terms(inst, &flows[ti], v, -1.0)).collect();
            model.add_constraint(format!("flow_{}_{}{sfx}", names.v(t), names.v(v)), terms, Sense::Eq, rhs)?;
        }
    }

    for (ti, &t) in sinks.iter().enumerate() {
        for (pi, &p) in pipes.iter().enumerate() {
            for e in inst.admissible_edges() {
                let (u, v) = graph.edge_labels(e);
                let table = &flows[ti][pi];
                let fwd = table[ArcIdx::new(e, false).0].expect("admissible arc");
                let bwd = table[ArcIdx::new(e, true).0].expect("admissible arc");
                let xe = x[p * graph.num_edges() + e];
                model.add_constraint(
                    format!("cap_{}_{}_{u}_{v}{sfx}", names.v(t), p + 1),
                    [(fwd, 1.0), (bwd, 1.0), (xe, -1.0)],
                    Sense::Le,
                    0.0,
                )?;
            }
        }
    }
    Ok(())
}

/// Directed formulation of one stage on top of its `x` block. Returns the
/// continuous `yk` and `y` variables.
fn add_directed_stage(
    model: &mut MilpModel,
    inst: &Instance,
    x: &[VarId],
    suffix: &str,
) -> Result<Vec<VarId>, ModelError> {
    let graph = inst.graph();
    let names = Names { inst, suffix: suffix.into() };
    let sfx = &names.suffix;
    let arcs = admissible_arcs(inst);
    let pipes: Vec<PipeIdx> = inst.feasible_pipes().collect();
    let terminals = inst.terminals();
    let num_groups = terminals.len();
    let mut arc_vars = Vec::new();

    // commodity (k, t) for t in groups k.. except the root of k
    let commodities: Vec<(usize, VertexIdx)> =
        (0..num_groups).flat_map(|k| terminals.tail_without_root(k).map(move |t| (k, t))).collect();
    let mut flows: Vec<Vec<ArcVars>> = Vec::with_capacity(commodities.len());
    for &(k, t) in &commodities {
        let mut per_pipe = Vec::with_capacity(pipes.len());
        for &p in &pipes {
            let mut table = vec![None; graph.num_arcs()];
            for &a in &arcs {
                let (u, v) = names.arc(a);
                let name = format!("fD_{}_{}_{}_{u}_{v}{sfx}", k + 1, names.v(t), p + 1);
                table[a.0] = Some(model.add_binary(name, 0.0)?);
            }
            per_pipe.push(table);
        }
        flows.push(per_pipe);
    }
    let mut group_arcs: Vec<Vec<ArcVars>> = Vec::with_capacity(num_groups);
    for k in 0..num_groups {
        let mut per_pipe = Vec::with_capacity(pipes.len());
        for &p in &pipes {
            let mut table = vec![None; graph.num_arcs()];
            for &a in &arcs {
                let (u, v) = names.arc(a);
                let var = model.add_continuous(format!("yk_{}_{}_{u}_{v}{sfx}", k + 1, p + 1), 0.0, 1.0, 0.0)?;
                arc_vars.push(var);
                table[a.0] = Some(var);
            }
            per_pipe.push(table);
        }
        group_arcs.push(per_pipe);
    }
    let mut used: Vec<ArcVars> = Vec::with_capacity(pipes.len());
    for &p in &pipes {
        let mut table = vec![None; graph.num_arcs()];
        for &a in &arcs {
            let (u, v) = names.arc(a);
            let var = model.add_continuous(format!("y_{}_{u}_{v}{sfx}", p + 1), 0.0, 1.0, 0.0)?;
            arc_vars.push(var);
            table[a.0] = Some(var);
        }
        used.push(table);
    }
    // z[k][l - k]
    let mut z: Vec<Vec<VarId>> = Vec::with_capacity(num_groups);
    for k in 0..num_groups {
        let row = (k..num_groups)
            .map(|l| model.add_binary(format!("z_{}_{}{sfx}", k + 1, l + 1), 0.0))
            .collect::<Result<Vec<_>, _>>()?;
        z.push(row);
    }
    let z_at = |k: usize, l: usize| z[k][l - k];

    // flow conservation from r^k to t, switched on by z_kl
    for (ci, &(k, t)) in commodities.iter().enumerate() {
        let l = terminals.group_of(t).expect("commodity sink is a terminal");
        let root = terminals.root(k);
        for v in 0..graph.num_vertices() {
            let mut terms: Vec<_> =
                out_terms(inst, &flows[ci], v, 1.0).chain(in_terms(inst, &flows[ci], v, -1.0)).collect();
            if v == root {
                terms.push((z_at(k, l), -1.0));
            } else if v == t {
                terms.push((z_at(k, l), 1.0));
            }
            model.add_constraint(
                format!("dflow_{}_{}_{}{sfx}", k + 1, names.v(t), names.v(v)),
                terms,
                Sense::Eq,
                0.0,
            )?;
        }
    }
    // flow activates the arborescence arc
    for (ci, &(k, t)) in commodities.iter().enumerate() {
        for (pi, &p) in pipes.iter().enumerate() {
            for &a in &arcs {
                let (u, v) = names.arc(a);
                let f = flows[ci][pi][a.0].expect("admissible arc");
                let yk = group_arcs[k][pi][a.0].expect("admissible arc");
                model.add_constraint(
                    format!("act_{}_{}_{}_{u}_{v}{sfx}", k + 1, names.v(t), p + 1),
                    [(f, 1.0), (yk, -1.0)],
                    Sense::Le,
                    0.0,
                )?;
            }
        }
    }
    // each arc belongs to at most one arborescence
    for (pi, &p) in pipes.iter().enumerate() {
        for &a in &arcs {
            let (u, v) = names.arc(a);
            let terms = (0..num_groups)
                .map(|k| (group_arcs[k][pi][a.0].expect("admissible arc"), 1.0))
                .chain([(used[pi][a.0].expect("admissible arc"), -1.0)]);
            model.add_constraint(format!("arb_{}_{u}_{v}{sfx}", p + 1), terms, Sense::Le, 0.0)?;
        }
    }
    // one direction per edge, paid for by x
    for (pi, &p) in pipes.iter().enumerate() {
        for e in inst.admissible_edges() {
            let (u, v) = graph.edge_labels(e);
            let fwd = used[pi][ArcIdx::new(e, false).0].expect("admissible arc");
            let bwd = used[pi][ArcIdx::new(e, true).0].expect("admissible arc");
            model.add_constraint(
                format!("dir_{}_{u}_{v}{sfx}", p + 1),
                [(fwd, 1.0), (bwd, 1.0), (x[p * graph.num_edges() + e], -1.0)],
                Sense::Le,
                0.0,
            )?;
        }
    }
    // every group is served by exactly one root of index <= its own
    for k in 0..num_groups {
        let terms = (0..=k).map(|l| (z_at(l, k), 1.0));
        model.add_constraint(format!("root_{}{sfx}", k + 1), terms, Sense::Eq, 1.0)?;
    }
    // a root serving others serves itself
    for k in 1..num_groups.saturating_sub(1) {
        for l in k + 1..num_groups {
            model.add_constraint(
                format!("rootself_{}_{}{sfx}", k + 1, l + 1),
                [(z_at(k, k), 1.0), (z_at(k, l), -1.0)],
                Sense::Ge,
                0.0,
            )?;
        }
    }
    // in-degree at most one
    for v in 0..graph.num_vertices() {
        let terms: Vec<_> = in_terms(inst, &used, v, 1.0).collect();
        model.add_constraint(format!("indeg_{}{sfx}", names.v(v)), terms, Sense::Le, 1.0)?;
    }
    // arborescence k never enters a terminal of an earlier group
    for (k, arcs_k) in group_arcs.iter().enumerate().skip(1) {
        for t in terminals.head(k) {
            let terms: Vec<_> = in_terms(inst, arcs_k, t, 1.0).collect();
            model.add_constraint(format!("noback_{}_{}{sfx}", k + 1, names.v(t)), terms, Sense::Eq, 0.0)?;
        }
    }
    // commodity flow never leaves its sink
    for (ci, &(k, t)) in commodities.iter().enumerate() {
        let terms: Vec<_> = out_terms(inst, &flows[ci], t, 1.0).collect();
        model.add_constraint(format!("sink_{}_{}{sfx}", k + 1, names.v(t)), terms, Sense::Eq, 0.0)?;
    }
    // Steiner vertices: in-degree <= out-degree
    for v in (0..graph.num_vertices()).filter(|&v| !terminals.is_terminal(v)) {
        let terms: Vec<_> = in_terms(inst, &used, v, 1.0).chain(out_terms(inst, &used, v, -1.0)).collect();
        model.add_constraint(format!("steiner_{}{sfx}", names.v(v)), terms, Sense::Le, 0.0)?;
    }
    // same per arborescence, outside its own sinks
    for (k, arcs_k) in group_arcs.iter().enumerate() {
        let sinks: Vec<VertexIdx> = terminals.tail_without_root(k).collect();
        for v in (0..graph.num_vertices()).filter(|v| !sinks.contains(v)) {
            let terms: Vec<_> = in_terms(inst, arcs_k, v, 1.0).chain(out_terms(inst, arcs_k, v, -1.0)).collect();
            model.add_constraint(format!("balance_{}_{}{sfx}", k + 1, names.v(v)), terms, Sense::Le, 0.0)?;
        }
    }
    // arborescence k may enter root r^l only when it serves group l
    for (k, arcs_k) in group_arcs.iter().enumerate() {
        for l in k + 1..num_groups {
            let root_l = terminals.root(l);
            for (pi, &p) in pipes.iter().enumerate() {
                let terms: Vec<_> = graph
                    .in_arcs(root_l)
                    .filter_map(|a| arcs_k[pi][a.0].map(|var| (var, 1.0)))
                    .chain([(z_at(k, l), -1.0)])
                    .collect();
                model.add_constraint(format!("useroot_{}_{}_{}{sfx}", k + 1, l + 1, p + 1), terms, Sense::Le, 0.0)?;
            }
        }
    }
    Ok(arc_vars)
}

fn add_stage(
    model: &mut MilpModel,
    inst: &Instance,
    flow: Flow,
    suffix: &str,
    fixed: Option<&EdgePipeSet>,
    implied: &mut Vec<VarId>,
) -> Result<Vec<VarId>, ModelError> {
    let x = add_installs(model, inst, suffix, fixed)?;
    implied.extend_from_slice(&x);
    match flow {
        Flow::Undirected => add_undirected_stage(model, inst, &x, suffix)?,
        Flow::Directed => implied.extend(add_directed_stage(model, inst, &x, suffix)?),
    }
    Ok(x)
}

fn empty_built(kind: ModelKind, inst: &Instance) -> BuiltModel {
    BuiltModel {
        milp: MilpModel::new(),
        kind,
        stats: SizeStats { variables: 0, constraints: 0 },
        num_edges: inst.graph().num_edges(),
        num_pipes: inst.num_pipe_types(),
        installs: Vec::new(),
        implied_integral: Vec::new(),
        retrofit: None,
    }
}

/// Single-stage model: minimise the cost of pairs outside `existing`, which
/// are installed for free.
pub fn build_do(instance: &Instance, existing: &EdgePipeSet, flow: Flow) -> Result<BuiltModel, ModelError> {
    let mut built = empty_built(ModelKind::new(Optimization::Deterministic, flow), instance);
    let x = add_stage(&mut built.milp, instance, flow, "", Some(existing), &mut built.implied_integral)?;
    let num_edges = instance.graph().num_edges();
    for (i, &var) in x.iter().enumerate() {
        let (p, e) = (i / num_edges, i % num_edges);
        if !existing.contains(p, e) {
            built.milp.set_objective_coefficient(var, instance.cost(p, e))?;
        }
    }
    built.installs.push(x);
    Ok(built.finish())
}

pub fn build_do_u(instance: &Instance, existing: &EdgePipeSet) -> Result<BuiltModel, ModelError> {
    build_do(instance, existing, Flow::Undirected)
}

pub fn build_do_d(instance: &Instance, existing: &EdgePipeSet) -> Result<BuiltModel, ModelError> {
    build_do(instance, existing, Flow::Directed)
}

fn build_two_stage(
    two_stage: &TwoStageInstance,
    optimization: Optimization,
    flow: Flow,
) -> Result<BuiltModel, ModelError> {
    let first = two_stage.first_stage();
    let mut built = empty_built(ModelKind::new(optimization, flow), first);
    let existing = two_stage.existing();
    let model = &mut built.milp;
    let x = add_stage(model, first, flow, "", Some(existing), &mut built.implied_integral)?;
    let graph = first.graph();
    let num_edges = graph.num_edges();
    for (i, &var) in x.iter().enumerate() {
        let (p, e) = (i / num_edges, i % num_edges);
        if !existing.contains(p, e) {
            model.set_objective_coefficient(var, first.cost(p, e))?;
        }
    }
    let mut blocks = vec![x];
    for (s, scenario) in two_stage.scenarios().iter().enumerate() {
        let suffix = format!("_s{}", s + 1);
        let xs = add_stage(model, scenario, flow, &suffix, None, &mut built.implied_integral)?;
        for (i, (&now, &later)) in blocks[0].iter().zip(&xs).enumerate() {
            let (p, e) = (i / num_edges, i % num_edges);
            let (u, v) = graph.edge_labels(e);
            model.add_constraint(
                format!("link_{}_{u}_{v}{suffix}", p + 1),
                [(later, 1.0), (now, -1.0)],
                Sense::Ge,
                0.0,
            )?;
        }
        blocks.push(xs);
    }
    match optimization {
        Optimization::Robust => {
            let d = model.add_continuous("d", 0.0, f64::INFINITY, 1.0)?;
            for (s, scenario) in two_stage.scenarios().iter().enumerate() {
                let mut terms = vec![(d, 1.0)];
                for (i, (&now, &later)) in blocks[0].iter().zip(&blocks[s + 1]).enumerate() {
                    let c = scenario.cost(i / num_edges, i % num_edges);
                    terms.push((later, -c));
                    terms.push((now, c));
                }
                model.add_constraint(format!("epi_s{}", s + 1), terms, Sense::Ge, 0.0)?;
            }
            built.retrofit = Some(d);
        }
        Optimization::Stochastic => {
            for (s, scenario) in two_stage.scenarios().iter().enumerate() {
                let rho = two_stage.probabilities()[s];
                for (i, (&now, &later)) in blocks[0].iter().zip(&blocks[s + 1]).enumerate() {
                    let c = rho * scenario.cost(i / num_edges, i % num_edges);
                    model.add_to_objective(later, c)?;
                    model.add_to_objective(now, -c)?;
                }
            }
        }
        Optimization::Deterministic => unreachable!("single-stage models use build_do"),
    }
    built.installs = blocks;
    Ok(built.finish())
}

/// Robust model: first-stage cost plus the worst scenario's retrofit cost.
pub fn build_ro(two_stage: &TwoStageInstance, flow: Flow) -> Result<BuiltModel, ModelError> {
    build_two_stage(two_stage, Optimization::Robust, flow)
}

/// Stochastic model: first-stage cost plus the expected retrofit cost.
pub fn build_so(two_stage: &TwoStageInstance, flow: Flow) -> Result<BuiltModel, ModelError> {
    build_two_stage(two_stage, Optimization::Stochastic, flow)
}

/// Builds any of the six models. Deterministic models use the first stage
/// and the pre-existing pairs only.
pub fn build(kind: ModelKind, two_stage: &TwoStageInstance) -> Result<BuiltModel, ModelError> {
    match kind.optimization {
        Optimization::Deterministic => build_do(two_stage.first_stage(), two_stage.existing(), kind.flow),
        Optimization::Robust => build_ro(two_stage, kind.flow),
        Optimization::Stochastic => build_so(two_stage, kind.flow),
    }
}
