//! LP and mixed-binary solves.
//!
//! Linear programs go to HiGHS (dual simplex, single thread). Mixed-binary
//! models are solved by a best-bound branch-and-bound that keeps one HiGHS
//! instance alive for the whole tree and only edits column bounds between
//! nodes, so every node LP is warm-started from the previous basis.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::rc::Rc;
use std::time::Instant;

use highs::{Col, HighsModelStatus, RowProblem, Sense as HighsSense};
use ssfp_core::milp::{
    MilpModel, MilpSolution, Sense, SolveStatus, VarId, VarKind, FEASIBILITY_TOLERANCE, INTEGRALITY_TOLERANCE,
};
use thiserror::Error;

pub use ssfp_core::oracle::{brute_force, OracleError, OracleSolution};

/// Nodes whose bound is within this distance of the incumbent are pruned.
pub const OBJECTIVE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolverError {
    #[error("variable {0} is binary; relax the model before an LP solve")]
    NotContinuous(String),
    #[error("node limit must be at least 1")]
    ZeroNodeLimit,
}

/// Branch-and-bound settings. Branching is most-fractional with ties going to
/// the lowest variable index; open nodes are explored best bound first.
#[derive(Debug, Clone, PartialEq)]
pub struct BnbConfig {
    pub node_limit: u64,
    /// Variables branched on before any other, by the same rule. They may be
    /// continuous on `[0, 1]` as long as every optimum has them integral.
    pub priority: Vec<VarId>,
    /// A known point, taken as the first incumbent when it is feasible.
    pub start: Option<Vec<f64>>,
    /// Dive from the root for an early incumbent when none is known.
    pub dive: bool,
    /// Wall-clock limit, reported like the node limit.
    pub deadline: Option<Instant>,
}

impl Default for BnbConfig {
    fn default() -> Self {
        BnbConfig { node_limit: 10_000_000, priority: Vec::new(), start: None, dive: true, deadline: None }
    }
}

/// One processed node, in processing order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeRecord {
    /// LP value at the node, `None` when the LP was infeasible.
    pub lp_objective: Option<f64>,
    /// Variable the node was split on, if it was split.
    pub branched_on: Option<VarId>,
}

enum LpOutcome {
    Optimal(Vec<f64>),
    Infeasible,
    Unbounded,
    Numerical,
}

/// Simplex basis status of every column and row.
struct Basis {
    cols: Vec<i32>,
    rows: Vec<i32>,
}

/// A HiGHS model mirroring a [`MilpModel`] with all variables continuous.
/// Empty rows are checked here and never handed to HiGHS.
struct LpEngine {
    highs: Option<highs::Model>,
    cols: Vec<Col>,
    num_rows: usize,
    lower: Vec<f64>,
    upper: Vec<f64>,
    last_values: Vec<f64>,
}

impl LpEngine {
    /// `None` when an empty row is violated.
    fn new(model: &MilpModel) -> Option<Self> {
        let mut problem = RowProblem::default();
        let lower: Vec<f64> = model.variables().iter().map(|v| v.lower).collect();
        let upper: Vec<f64> = model.variables().iter().map(|v| v.upper).collect();
        let cols: Vec<Col> =
            model.variables().iter().map(|v| problem.add_column(v.objective, v.lower..=v.upper)).collect();
        let mut num_rows = 0;
        for c in model.constraints() {
            if c.terms.is_empty() {
                if !c.sense.holds(0.0, c.rhs, FEASIBILITY_TOLERANCE) {
                    return None;
                }
                continue;
            }
            num_rows += 1;
            let terms: Vec<(Col, f64)> = c.terms.iter().map(|&(v, a)| (cols[v.0], a)).collect();
            match c.sense {
                Sense::Le => problem.add_row(..=c.rhs, terms),
                Sense::Ge => problem.add_row(c.rhs.., terms),
                Sense::Eq => problem.add_row(c.rhs..=c.rhs, terms),
            }
        }
        let mut highs = problem.optimise(HighsSense::Minimise);
        highs.make_quiet();
        highs.set_option("threads", 1);
        highs.set_option("solver", "simplex");
        highs.set_option("primal_feasibility_tolerance", FEASIBILITY_TOLERANCE);
        highs.set_option("dual_feasibility_tolerance", FEASIBILITY_TOLERANCE);
        Some(LpEngine { highs: Some(highs), cols, num_rows, lower, upper, last_values: Vec::new() })
    }

    fn set_bounds(&mut self, var: usize, lower: f64, upper: f64) {
        if let Some(h) = self.highs.as_mut() {
            h.change_column_bounds(self.cols[var], lower..=upper);
        }
    }

    fn restore_bounds(&mut self, var: usize) {
        let (lo, hi) = (self.lower[var], self.upper[var]);
        self.set_bounds(var, lo, hi);
    }

    fn solve(&mut self) -> LpOutcome {
        let outcome = self.run();
        if matches!(outcome, Some(HighsModelStatus::UnboundedOrInfeasible)) {
            // presolve could not tell the two apart; the simplex alone can
            if let Some(h) = self.highs.as_mut() {
                h.set_option("presolve", "off");
            }
            let again = self.run();
            if let Some(h) = self.highs.as_mut() {
                h.set_option("presolve", "choose");
            }
            return self.classify(again);
        }
        self.classify(outcome)
    }

    fn run(&mut self) -> Option<HighsModelStatus> {
        let model = self.highs.take()?;
        let solved = model.try_solve().ok()?;
        let status = solved.status();
        let values = solved.get_solution().columns().to_vec();
        self.highs = Some(solved.into());
        self.last_values = values;
        Some(status)
    }

    /// Basis of the last solve.
    fn basis(&mut self) -> Option<Basis> {
        let h = self.highs.as_mut()?;
        let mut basis = Basis { cols: vec![0; self.cols.len()], rows: vec![0; self.num_rows] };
        // SAFETY: the buffers have exactly the model's column and row counts
        let status =
            unsafe { highs_sys::Highs_getBasis(h.as_mut_ptr(), basis.cols.as_mut_ptr(), basis.rows.as_mut_ptr()) };
        (status == highs_sys::kHighsStatusOk).then_some(basis)
    }

    fn set_basis(&mut self, basis: &Basis) {
        if let Some(h) = self.highs.as_mut() {
            // SAFETY: as in `basis`; a rejected basis leaves the current one in place
            unsafe { highs_sys::Highs_setBasis(h.as_mut_ptr(), basis.cols.as_ptr(), basis.rows.as_ptr()) };
        }
    }

    fn classify(&mut self, status: Option<HighsModelStatus>) -> LpOutcome {
        match status {
            Some(HighsModelStatus::Optimal) => LpOutcome::Optimal(std::mem::take(&mut self.last_values)),
            Some(HighsModelStatus::ModelEmpty) => LpOutcome::Optimal(vec![0.0; self.cols.len()]),
            Some(HighsModelStatus::Infeasible) => LpOutcome::Infeasible,
            Some(HighsModelStatus::Unbounded) => LpOutcome::Unbounded,
            _ => LpOutcome::Numerical,
        }
    }
}

/// Optimum of a model whose variables are all continuous.
pub fn solve_lp(model: &MilpModel) -> Result<MilpSolution, SolverError> {
    if let Some(v) = model.variables().iter().find(|v| v.kind == VarKind::Binary) {
        return Err(SolverError::NotContinuous(v.name.clone()));
    }
    let start = Instant::now();
    let mut out = match LpEngine::new(model) {
        None => MilpSolution::empty(SolveStatus::Infeasible, f64::INFINITY),
        Some(mut engine) => match engine.solve() {
            LpOutcome::Optimal(values) => point(model, SolveStatus::Optimal, values),
            LpOutcome::Infeasible => MilpSolution::empty(SolveStatus::Infeasible, f64::INFINITY),
            LpOutcome::Unbounded => MilpSolution::empty(SolveStatus::Unbounded, f64::NEG_INFINITY),
            LpOutcome::Numerical => MilpSolution::empty(SolveStatus::Numerical, f64::NEG_INFINITY),
        },
    };
    out.node_count = 1;
    out.solve_time = start.elapsed();
    Ok(out)
}

fn point(model: &MilpModel, status: SolveStatus, values: Vec<f64>) -> MilpSolution {
    let objective = model.objective_value(&values);
    MilpSolution { status, objective, bound: objective, values, ..MilpSolution::empty(status, objective) }
}

/// Optimum of a mixed-binary model.
pub fn solve_milp(model: &MilpModel, config: &BnbConfig) -> Result<MilpSolution, SolverError> {
    solve_milp_traced(model, config).map(|(solution, _)| solution)
}

struct Node {
    parent: Option<usize>,
    fixing: Option<(usize, f64)>,
    bound: f64,
    /// Optimal basis of the parent's LP.
    basis: Option<Rc<Basis>>,
}

#[derive(PartialEq)]
struct Open {
    bound: f64,
    id: usize,
}

impl Eq for Open {}

impl Ord for Open {
    // reversed so the max-heap pops the smallest bound, then the oldest node
    fn cmp(&self, other: &Self) -> Ordering {
        other.bound.total_cmp(&self.bound).then(other.id.cmp(&self.id))
    }
}

impl PartialOrd for Open {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn prunable(bound: f64, incumbent: f64) -> bool {
    bound >= incumbent - OBJECTIVE_TOLERANCE * incumbent.abs().max(1.0)
}

/// Most fractional binary, lowest index first among ties.
fn branching_variable(binaries: &[usize], values: &[f64]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for &j in binaries {
        let frac = values[j] - values[j].floor();
        let distance = frac.min(1.0 - frac);
        if distance > INTEGRALITY_TOLERANCE && best.is_none_or(|(_, d)| distance > d) {
            best = Some((j, distance));
        }
    }
    best.map(|(j, _)| j)
}

/// Fractional binary closest to an integer, lowest index first among ties.
fn dive_variable(binaries: &[usize], values: &[f64]) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64, f64)> = None;
    for &j in binaries {
        let target = values[j].round();
        let distance = (values[j] - target).abs();
        if distance > INTEGRALITY_TOLERANCE && best.is_none_or(|(_, _, d)| distance < d) {
            best = Some((j, target, distance));
        }
    }
    best.map(|(j, target, _)| (j, target))
}

/// Rounds the root LP point one variable at a time, re-solving after each
/// fixing and flipping a fixing once when it makes the LP infeasible. Leaves
/// the engine's bounds as they were.
fn dive(
    engine: &mut LpEngine,
    model: &MilpModel,
    binaries: &[usize],
    priority: &[usize],
    root: &[f64],
) -> Option<Vec<f64>> {
    let mut values = root.to_vec();
    let mut touched = Vec::new();
    let found = loop {
        let Some((j, target)) = dive_variable(priority, &values).or_else(|| dive_variable(binaries, &values)) else {
            let mut point = values;
            for &j in binaries.iter().chain(priority) {
                point[j] = point[j].round();
            }
            break model.is_feasible_point(&point, FEASIBILITY_TOLERANCE, INTEGRALITY_TOLERANCE).then_some(point);
        };
        touched.push(j);
        engine.set_bounds(j, target, target);
        values = match engine.solve() {
            LpOutcome::Optimal(v) => v,
            LpOutcome::Infeasible => {
                engine.set_bounds(j, 1.0 - target, 1.0 - target);
                match engine.solve() {
                    LpOutcome::Optimal(v) => v,
                    _ => break None,
                }
            }
            _ => break None,
        };
    };
    for j in touched {
        engine.restore_bounds(j);
    }
    found
}

/// [`solve_milp`] that also returns the processed nodes in order.
pub fn solve_milp_traced(
    model: &MilpModel,
    config: &BnbConfig,
) -> Result<(MilpSolution, Vec<NodeRecord>), SolverError> {
    if config.node_limit == 0 {
        return Err(SolverError::ZeroNodeLimit);
    }
    let start = Instant::now();
    let mut trace = Vec::new();
    let Some(mut engine) = LpEngine::new(model) else {
        let mut out = MilpSolution::empty(SolveStatus::Infeasible, f64::INFINITY);
        out.solve_time = start.elapsed();
        return Ok((out, trace));
    };
    let binaries: Vec<usize> = model.binaries().map(|v| v.0).collect();
    let priority: Vec<usize> = config.priority.iter().map(|v| v.0).collect();

    let mut nodes = vec![Node { parent: None, fixing: None, bound: f64::NEG_INFINITY, basis: None }];
    let mut open = BinaryHeap::from([Open { bound: f64::NEG_INFINITY, id: 0 }]);
    let mut fixed: Vec<Option<f64>> = vec![None; model.num_variables()];
    let mut fixed_list: Vec<usize> = Vec::new();
    let mut incumbent: Option<(f64, Vec<f64>)> = config
        .start
        .as_ref()
        .filter(|point| {
            point.len() == model.num_variables()
                && model.is_feasible_point(point, FEASIBILITY_TOLERANCE, INTEGRALITY_TOLERANCE)
        })
        .map(|point| (model.objective_value(point), point.clone()));
    let mut processed = 0u64;
    let mut status = None;

    while let Some(top) = open.peek() {
        let incumbent_value = incumbent.as_ref().map_or(f64::INFINITY, |(v, _)| *v);
        if prunable(top.bound, incumbent_value) {
            open.clear();
            break;
        }
        if processed >= config.node_limit || config.deadline.is_some_and(|d| Instant::now() >= d) {
            status = Some(SolveStatus::NodeLimit);
            break;
        }
        let Open { id, .. } = open.pop().expect("peeked");
        processed += 1;

        // move the engine's bounds from the previous node to this one
        let mut wanted: Vec<(usize, f64)> = Vec::new();
        let mut cursor = Some(id);
        while let Some(n) = cursor {
            if let Some(f) = nodes[n].fixing {
                wanted.push(f);
            }
            cursor = nodes[n].parent;
        }
        for &j in &fixed_list {
            if !wanted.iter().any(|&(w, _)| w == j) {
                engine.restore_bounds(j);
                fixed[j] = None;
            }
        }
        for &(j, val) in &wanted {
            if fixed[j] != Some(val) {
                engine.set_bounds(j, val, val);
                fixed[j] = Some(val);
            }
        }
        fixed_list = wanted.iter().map(|&(j, _)| j).collect();
        if let Some(basis) = nodes[id].basis.take() {
            engine.set_basis(&basis);
        }

        let values = match engine.solve() {
            LpOutcome::Optimal(values) => values,
            LpOutcome::Infeasible => {
                trace.push(NodeRecord { lp_objective: None, branched_on: None });
                continue;
            }
            LpOutcome::Unbounded if id == 0 => {
                status = Some(SolveStatus::Unbounded);
                break;
            }
            LpOutcome::Unbounded | LpOutcome::Numerical => {
                open.push(Open { bound: nodes[id].bound, id });
                status = Some(SolveStatus::Numerical);
                break;
            }
        };
        let lp_objective = model.objective_value(&values);
        let incumbent_value = incumbent.as_ref().map_or(f64::INFINITY, |(v, _)| *v);
        if prunable(lp_objective, incumbent_value) {
            trace.push(NodeRecord { lp_objective: Some(lp_objective), branched_on: None });
            continue;
        }
        match branching_variable(&priority, &values).or_else(|| branching_variable(&binaries, &values)) {
            None => {
                let mut values = values;
                for &j in binaries.iter().chain(&priority) {
                    values[j] = values[j].round();
                }
                let objective = model.objective_value(&values);
                trace.push(NodeRecord { lp_objective: Some(lp_objective), branched_on: None });
                incumbent = Some((objective, values));
            }
            Some(j) => {
                trace.push(NodeRecord { lp_objective: Some(lp_objective), branched_on: Some(VarId(j)) });
                let basis = engine.basis().map(Rc::new);
                if id == 0 && incumbent.is_none() && config.dive {
                    if let Some(point) = dive(&mut engine, model, &binaries, &priority, &values) {
                        incumbent = Some((model.objective_value(&point), point));
                    }
                    if let Some(b) = &basis {
                        engine.set_basis(b);
                    }
                }
                for val in [0.0, 1.0] {
                    let child = nodes.len();
                    nodes.push(Node {
                        parent: Some(id),
                        fixing: Some((j, val)),
                        bound: lp_objective,
                        basis: basis.clone(),
                    });
                    open.push(Open { bound: lp_objective, id: child });
                }
            }
        }
    }

    let open_bound = open.iter().map(|o| nodes[o.id].bound).fold(f64::INFINITY, f64::min);
    let mut out = match (status, incumbent) {
        (Some(SolveStatus::Unbounded), _) => MilpSolution::empty(SolveStatus::Unbounded, f64::NEG_INFINITY),
        (Some(s), Some((objective, values))) => MilpSolution {
            status: s,
            objective,
            bound: open_bound.min(objective),
            values,
            ..MilpSolution::empty(s, objective)
        },
        (Some(s), None) => MilpSolution::empty(s, open_bound),
        (None, Some((objective, values))) => MilpSolution {
            status: SolveStatus::Optimal,
            objective,
            bound: objective,
            values,
            ..MilpSolution::empty(SolveStatus::Optimal, objective)
        },
        (None, None) => MilpSolution::empty(SolveStatus::Infeasible, f64::INFINITY),
    };
    out.node_count = processed;
    out.solve_time = start.elapsed();
    Ok((out, trace))
}

/// Hands the whole mixed-binary model to the HiGHS MIP solver.
pub fn solve_milp_highs(model: &MilpModel, config: &BnbConfig) -> Result<MilpSolution, SolverError> {
    if config.node_limit == 0 {
        return Err(SolverError::ZeroNodeLimit);
    }
    let start = Instant::now();
    let mut problem = RowProblem::default();
    let cols: Vec<Col> = model
        .variables()
        .iter()
        .map(|v| match v.kind {
            VarKind::Binary => problem.add_integer_column(v.objective, v.lower..=v.upper),
            VarKind::Continuous => problem.add_column(v.objective, v.lower..=v.upper),
        })
        .collect();
    for c in model.constraints() {
        if c.terms.is_empty() {
            if !c.sense.holds(0.0, c.rhs, FEASIBILITY_TOLERANCE) {
                let mut out = MilpSolution::empty(SolveStatus::Infeasible, f64::INFINITY);
                out.solve_time = start.elapsed();
                return Ok(out);
            }
            continue;
        }
        let terms: Vec<(Col, f64)> = c.terms.iter().map(|&(v, a)| (cols[v.0], a)).collect();
        match c.sense {
            Sense::Le => problem.add_row(..=c.rhs, terms),
            Sense::Ge => problem.add_row(c.rhs.., terms),
            Sense::Eq => problem.add_row(c.rhs..=c.rhs, terms),
        }
    }
    let mut highs = problem.optimise(HighsSense::Minimise);
    highs.make_quiet();
    highs.set_option("threads", 1);
    highs.set_option("mip_rel_gap", 0.0);
    highs.set_option("mip_abs_gap", 1e-9);
    highs.set_option("mip_feasibility_tolerance", INTEGRALITY_TOLERANCE);
    highs.set_option("primal_feasibility_tolerance", FEASIBILITY_TOLERANCE);
    highs.set_option("mip_max_nodes", i32::try_from(config.node_limit).unwrap_or(i32::MAX));
    let Ok(solved) = highs.try_solve() else {
        let mut out = MilpSolution::empty(SolveStatus::Numerical, f64::NEG_INFINITY);
        out.solve_time = start.elapsed();
        return Ok(out);
    };
    let nodes = solved.int_info_value(c"mip_node_count").unwrap_or(0).max(0) as u64;
    let bound = solved.double_info_value(c"mip_dual_bound").unwrap_or(f64::NEG_INFINITY);
    let status = match solved.status() {
        HighsModelStatus::Optimal => SolveStatus::Optimal,
        HighsModelStatus::Infeasible => SolveStatus::Infeasible,
        HighsModelStatus::Unbounded | HighsModelStatus::UnboundedOrInfeasible => SolveStatus::Unbounded,
        HighsModelStatus::ReachedSolutionLimit | HighsModelStatus::ReachedIterationLimit => SolveStatus::NodeLimit,
        _ => SolveStatus::Numerical,
    };
    let has_point = matches!(status, SolveStatus::Optimal | SolveStatus::NodeLimit)
        && solved.primal_solution_status() == highs::HighsSolutionStatus::Feasible;
    let mut out = if has_point {
        let mut values = solved.get_solution().columns().to_vec();
        for (v, x) in model.variables().iter().zip(values.iter_mut()) {
            if v.kind == VarKind::Binary {
                *x = x.round();
            }
        }
        let objective = model.objective_value(&values);
        MilpSolution {
            status,
            objective,
            values,
            bound: if status == SolveStatus::Optimal { objective } else { bound },
            ..MilpSolution::empty(status, bound)
        }
    } else {
        MilpSolution::empty(status, bound)
    };
    out.node_count = nodes;
    out.solve_time = start.elapsed();
    Ok(out)
}
