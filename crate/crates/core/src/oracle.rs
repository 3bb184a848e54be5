//! Exhaustive search over installation sets, used as an independent check on
//! the MILP models for tiny instances.
//!
//! Every subset of `(pipe, edge)` pairs is a bitmask. For each scenario the
//! cheapest completion of every mask is tabulated by a backward recursion over
//! supersets; the first stage then scans all masks in increasing order,
//! skipping those whose first-stage cost already reaches the incumbent.
//! Feasibility of a mask is decided by [`validate_feasible`].

use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::error::InstanceError;
use crate::graph::{validate_feasible, EdgeIdx, EdgePipeSet, Instance, PipeIdx, TwoStageInstance};
use crate::models::Optimization;

/// Largest `|P|·|E|` the search accepts.
pub const MAX_PAIRS: usize = 22;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("exhaustive search needs {pairs} pipe/edge pairs, limit is {limit}")]
    BudgetExceeded { pairs: usize, limit: usize },
    #[error("no feasible installation exists")]
    Infeasible,
    #[error(transparent)]
    Instance(#[from] InstanceError),
}

/// Optimum found by [`brute_force`].
#[derive(Debug, Clone, PartialEq)]
pub struct OracleSolution {
    pub objective: f64,
    /// First-stage set, pre-existing pairs included.
    pub first: EdgePipeSet,
    /// Cheapest completion per scenario (pairs added on top of `first`);
    /// empty for deterministic mode.
    pub recourse: Vec<EdgePipeSet>,
}

struct Pairs {
    list: Vec<(PipeIdx, EdgeIdx)>,
}

impl Pairs {
    fn set(&self, mask: u32) -> EdgePipeSet {
        self.list.iter().enumerate().filter(|(i, _)| mask & (1 << i) != 0).map(|(_, &pair)| pair).collect()
    }

    fn mask_of(&self, set: &EdgePipeSet) -> u32 {
        self.list.iter().enumerate().filter(|(_, &(p, e))| set.contains(p, e)).fold(0, |m, (i, _)| m | (1 << i))
    }

    fn costs(&self, inst: &Instance, free: u32) -> Vec<f64> {
        self.list
            .iter()
            .enumerate()
            .map(|(i, &(p, e))| if free & (1 << i) != 0 { 0.0 } else { inst.cost(p, e) })
            .collect()
    }
}

fn feasible_table(inst: &Instance, pairs: &Pairs) -> Result<Vec<bool>, InstanceError> {
    (0..1u32 << pairs.list.len()).map(|mask| Ok(validate_feasible(inst, &pairs.set(mask))?.is_feasible())).collect()
}

/// Cheapest completion cost of every mask, with the pair added first on an
/// optimal completion (`u8::MAX` when the mask is already feasible).
fn completion_table(inst: &Instance, pairs: &Pairs, free: u32) -> Result<(Vec<f64>, Vec<u8>), InstanceError> {
    let n = pairs.list.len();
    let feasible = feasible_table(inst, pairs)?;
    let costs = pairs.costs(inst, free);
    let full = 1usize << n;
    let mut best = vec![f64::INFINITY; full];
    let mut choice = vec![u8::MAX; full];
    for mask in (0..full).rev() {
        if feasible[mask] {
            best[mask] = 0.0;
            continue;
        }
        for i in 0..n {
            if mask & (1 << i) == 0 {
                let cand = costs[i] + best[mask | (1 << i)];
                if cand < best[mask] {
                    best[mask] = cand;
                    choice[mask] = i as u8;
                }
            }
        }
    }
    Ok((best, choice))
}

fn walk_completion(pairs: &Pairs, choice: &[u8], mut mask: u32) -> EdgePipeSet {
    let start = mask;
    while choice[mask as usize] != u8::MAX {
        mask |= 1 << choice[mask as usize];
    }
    pairs.set(mask & !start)
}

/// Exact optimum of the deterministic, robust or stochastic problem by
/// enumeration. Stochastic mode weighs scenarios by the instance's
/// probabilities.
pub fn brute_force(two_stage: &TwoStageInstance, mode: Optimization) -> Result<OracleSolution, OracleError> {
    let first = two_stage.first_stage();
    let n = first.num_pipe_types() * first.graph().num_edges();
    if n > MAX_PAIRS {
        return Err(OracleError::BudgetExceeded { pairs: n, limit: MAX_PAIRS });
    }
    let num_edges = first.graph().num_edges();
    let pairs = Pairs { list: (0..n).map(|i| (i / num_edges, i % num_edges)).collect() };
    let free = pairs.mask_of(two_stage.existing());
    let first_feasible = feasible_table(first, &pairs)?;
    let first_costs = pairs.costs(first, free);

    let scenarios = match mode {
        Optimization::Deterministic => Vec::new(),
        _ => two_stage.scenarios().iter().map(|s| completion_table(s, &pairs, free)).collect::<Result<Vec<_>, _>>()?,
    };

    let mut best: Option<(f64, u32)> = None;
    for mask in 0..1u32 << n {
        if mask & free != free || !first_feasible[mask as usize] {
            continue;
        }
        let stage_one: f64 = (0..n).filter(|&i| mask & (1 << i) != 0).map(|i| first_costs[i]).sum();
        if best.is_some_and(|(b, _)| stage_one >= b) {
            continue;
        }
        let recourse = scenarios.iter().map(|(table, _)| table[mask as usize]);
        let second = match mode {
            Optimization::Deterministic => 0.0,
            Optimization::Robust => recourse.fold(0.0, f64::max),
            Optimization::Stochastic => {
                recourse.zip(two_stage.probabilities()).map(|(c, &rho)| if rho == 0.0 { 0.0 } else { rho * c }).sum()
            }
        };
        let total = stage_one + second;
        if best.is_none_or(|(b, _)| total < b) {
            best = Some((total, mask));
        }
    }
    let (objective, mask) = best.ok_or(OracleError::Infeasible)?;
    Ok(OracleSolution {
        objective,
        first: pairs.set(mask),
        recourse: scenarios.iter().map(|(_, choice)| walk_completion(&pairs, choice, mask)).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Graph, PipeCatalog, TerminalGroups};
    use alloc::sync::Arc;

    fn single_edge() -> Instance {
        let graph = Arc::new(Graph::new(2, [(1, 2)]).unwrap());
        let pipes = Arc::new(PipeCatalog::scaled(&[5.0], &[1.0]).unwrap());
        let terminals = TerminalGroups::new(2, vec![vec![0, 1]]).unwrap();
        Instance::new(graph, pipes, terminals, &[0], &[0], 1.0).unwrap()
    }

    #[test]
    fn one_edge_deterministic() {
        let inst = single_edge();
        let two = TwoStageInstance::new(
            inst.clone(),
            vec![inst.with_multiplier(2.0).unwrap()],
            vec![1.0],
            EdgePipeSet::new(),
        )
        .unwrap();
        let sol = brute_force(&two, Optimization::Deterministic).unwrap();
        assert_eq!(sol.objective, 5.0);
        assert_eq!(sol.first.len(), 1);
        let ro = brute_force(&two, Optimization::Robust).unwrap();
        assert_eq!(ro.objective, 5.0);
        assert!(ro.recourse[0].is_empty());
    }

    #[test]
    fn existing_pairs_are_free() {
        let inst = single_edge();
        let existing: EdgePipeSet = [(0, 0)].into_iter().collect();
        let two =
            TwoStageInstance::new(inst.clone(), vec![inst.with_multiplier(2.0).unwrap()], vec![1.0], existing).unwrap();
        assert_eq!(brute_force(&two, Optimization::Stochastic).unwrap().objective, 0.0);
    }

    #[test]
    fn refuses_large_instances() {
        let edges: Vec<(u32, u32)> = (1..24).map(|i| (i, i + 1)).collect();
        let graph = Arc::new(Graph::new(24, edges).unwrap());
        let pipes = Arc::new(PipeCatalog::scaled(&[1.0; 23], &[1.0]).unwrap());
        let terminals = TerminalGroups::new(24, vec![vec![0, 23]]).unwrap();
        let all: Vec<usize> = (0..23).collect();
        let inst = Instance::new(graph, pipes, terminals, &[0], &all, 1.0).unwrap();
        let two = TwoStageInstance::new(
            inst.clone(),
            vec![inst.with_multiplier(2.0).unwrap()],
            vec![1.0],
            EdgePipeSet::new(),
        )
        .unwrap();
        assert_eq!(
            brute_force(&two, Optimization::Deterministic),
            Err(OracleError::BudgetExceeded { pairs: 23, limit: MAX_PAIRS })
        );
    }
}
