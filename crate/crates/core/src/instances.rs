//! Built-in instances and seeded generators.
//!
//! Random instances use [`ChaCha8Rng`] seeded with `seed_from_u64`, so a seed
//! names the same instance on every platform. Edge costs are drawn first, in
//! edge order, then each stage shuffles the vertex list once and fills its
//! groups sequentially from the front of the shuffle.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::error::InstanceError;
use crate::graph::{EdgePipeSet, Graph, Instance, PipeCatalog, TerminalGroups, TwoStageInstance};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GenerateError {
    #[error("grid dimensions must be positive")]
    EmptyGrid,
    #[error("{requested} terminals requested but the graph has {available} vertices")]
    TooManyTerminals { requested: usize, available: usize },
    #[error(transparent)]
    Instance(#[from] InstanceError),
}

/// Vertices `1..=rows·cols` numbered row by row, with 4-neighbourhood edges
/// listed in lexicographic order.
pub fn grid_graph(rows: usize, cols: usize) -> Result<Graph, GenerateError> {
    grid_without(rows, cols, &[])
}

/// Grid graph with some vertices removed. Remaining vertices keep their grid
/// labels.
pub fn grid_without(rows: usize, cols: usize, removed: &[u32]) -> Result<Graph, GenerateError> {
    if rows == 0 || cols == 0 {
        return Err(GenerateError::EmptyGrid);
    }
    let label = |r: usize, c: usize| (r * cols + c + 1) as u32;
    let keep = |l: u32| !removed.contains(&l);
    let labels: Vec<u32> = (1..=(rows * cols) as u32).filter(|&l| keep(l)).collect();
    let mut edges = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            let u = label(r, c);
            if c + 1 < cols {
                edges.push((u, label(r, c + 1)));
            }
            if r + 1 < rows {
                edges.push((u, label(r + 1, c)));
            }
        }
    }
    edges.retain(|&(u, v)| keep(u) && keep(v));
    Ok(Graph::with_labels(labels, edges)?)
}

fn groups_by_label(graph: &Graph, groups: &[&[u32]]) -> Result<TerminalGroups, InstanceError> {
    let groups = groups
        .iter()
        .map(|g| {
            g.iter().map(|&l| graph.index_of(l).ok_or(InstanceError::UnknownVertex(l))).collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    TerminalGroups::new(graph.num_vertices(), groups)
}

/// Rooms the worked example's deck plan leaves out of the 6×6 grid.
pub const FIG2_REMOVED: [u32; 3] = [11, 15, 21];

/// The diesel-to-diesel-or-methanol example on a 6×6 deck: engine room 8,
/// diesel tank 22, methanol tank 32. Single-walled pipes cost 1 per edge,
/// double-walled 2, second-stage costs double, and methanol needs
/// double-walled pipes. `rho2` is the methanol probability.
pub fn fig2_instance(rho2: f64) -> Result<TwoStageInstance, GenerateError> {
    let graph = Arc::new(grid_without(6, 6, &FIG2_REMOVED)?);
    let base = vec![1.0; graph.num_edges()];
    let pipes = Arc::new(PipeCatalog::scaled(&base, &[1.0, 2.0])?);
    let all: Vec<usize> = (0..graph.num_edges()).collect();
    let stage = |group: &[u32], feasible: &[usize], multiplier: f64| {
        let terminals = groups_by_label(&graph, &[group])?;
        Instance::new(graph.clone(), pipes.clone(), terminals, feasible, &all, multiplier)
    };
    let first = stage(&[8, 22], &[0, 1], 1.0)?;
    let diesel = stage(&[8, 22], &[0, 1], 2.0)?;
    let methanol = stage(&[8, 32], &[1], 2.0)?;
    if !(0.0..=1.0).contains(&rho2) {
        return Err(InstanceError::BadProbabilities.into());
    }
    Ok(TwoStageInstance::new(first, vec![diesel, methanol], vec![1.0 - rho2, rho2], EdgePipeSet::new())?)
}

/// Four rooms on a cycle `1-2-3-4-1` with unit costs, one pipe type and two
/// groups on opposite corners: `{1, 3}` rooted at 1 and `{2, 4}` rooted at 2.
pub fn four_cycle_instance() -> Result<Instance, GenerateError> {
    let graph = Arc::new(Graph::new(4, [(1, 2), (2, 3), (3, 4), (1, 4)])?);
    let pipes = Arc::new(PipeCatalog::scaled(&[1.0; 4], &[1.0])?);
    let terminals = groups_by_label(&graph, &[&[1, 3], &[2, 4]])?;
    Ok(Instance::new(graph, pipes, terminals, &[0], &[0, 1, 2, 3], 1.0)?)
}

/// The four-cycle with one second-stage scenario identical to the first stage
/// at doubled cost.
pub fn four_cycle_two_stage() -> Result<TwoStageInstance, GenerateError> {
    let first = four_cycle_instance()?;
    let later = first.with_multiplier(2.0)?;
    Ok(TwoStageInstance::new(first, vec![later], vec![1.0], EdgePipeSet::new())?)
}

/// Shape of a random grid instance.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub rows: usize,
    pub cols: usize,
    /// Cost of each pipe type relative to the drawn base cost.
    pub pipe_ratios: Vec<f64>,
    pub num_scenarios: usize,
    pub num_groups: usize,
    pub terminals_per_group: usize,
    /// Base costs are drawn uniformly from `[cost_low, cost_high)`.
    pub cost_low: f64,
    pub cost_high: f64,
    pub multiplier: f64,
}

impl GridSpec {
    /// The artificial sweep instance: 5×5 grid, single- and double-walled
    /// pipes, costs uniform on `[1, 10]`, second-stage costs doubled.
    pub fn artificial(setting: Setting) -> Self {
        GridSpec {
            rows: 5,
            cols: 5,
            pipe_ratios: vec![1.0, 2.0],
            num_scenarios: setting.num_scenarios,
            num_groups: setting.num_groups,
            terminals_per_group: setting.terminals_per_group,
            cost_low: 1.0,
            cost_high: 10.0,
            multiplier: 2.0,
        }
    }
}

/// Random instance on a grid: every pipe feasible and every edge admissible
/// in every stage, equal scenario probabilities.
pub fn random_grid(spec: &GridSpec, seed: u64) -> Result<TwoStageInstance, GenerateError> {
    let graph = Arc::new(grid_graph(spec.rows, spec.cols)?);
    let needed = spec.num_groups * spec.terminals_per_group;
    if needed > graph.num_vertices() {
        return Err(GenerateError::TooManyTerminals { requested: needed, available: graph.num_vertices() });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base: Vec<f64> = (0..graph.num_edges()).map(|_| rng.random_range(spec.cost_low..spec.cost_high)).collect();
    let pipes = Arc::new(PipeCatalog::scaled(&base, &spec.pipe_ratios)?);
    let all_pipes: Vec<usize> = (0..spec.pipe_ratios.len()).collect();
    let all_edges: Vec<usize> = (0..graph.num_edges()).collect();
    let mut stage = |multiplier: f64| -> Result<Instance, GenerateError> {
        let mut vertices: Vec<usize> = (0..graph.num_vertices()).collect();
        vertices.shuffle(&mut rng);
        let groups = vertices[..needed].chunks(spec.terminals_per_group).map(<[usize]>::to_vec).collect();
        let terminals = TerminalGroups::new(graph.num_vertices(), groups)?;
        Ok(Instance::new(graph.clone(), pipes.clone(), terminals, &all_pipes, &all_edges, multiplier)?)
    };
    let first = stage(1.0)?;
    let scenarios = (0..spec.num_scenarios).map(|_| stage(spec.multiplier)).collect::<Result<Vec<_>, _>>()?;
    let rho = 1.0 / spec.num_scenarios as f64;
    let mut probabilities = vec![rho; spec.num_scenarios];
    // absorb rounding so the probabilities sum to one exactly
    let rest: f64 = probabilities[1..].iter().sum();
    probabilities[0] = 1.0 - rest;
    Ok(TwoStageInstance::new(first, scenarios, probabilities, EdgePipeSet::new())?)
}

/// One cell of the artificial parameter study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Setting {
    pub num_scenarios: usize,
    pub num_groups: usize,
    pub terminals_per_group: usize,
}

/// Parameter grid and seeds of the artificial study.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepConfig {
    pub scenario_counts: Vec<usize>,
    pub group_counts: Vec<usize>,
    pub terminal_counts: Vec<usize>,
    pub seeds: Vec<u64>,
}

impl SweepConfig {
    /// Two to four scenarios, one to three groups, three to five terminals per
    /// group, with seeds `0..num_seeds`.
    pub fn full(num_seeds: u64) -> Self {
        SweepConfig {
            scenario_counts: vec![2, 3, 4],
            group_counts: vec![1, 2, 3],
            terminal_counts: vec![3, 4, 5],
            seeds: (0..num_seeds).collect(),
        }
    }

    /// Settings ordered by scenarios, then groups, then terminals.
    pub fn settings(&self) -> Vec<Setting> {
        let mut out = Vec::new();
        for &num_scenarios in &self.scenario_counts {
            for &num_groups in &self.group_counts {
                for &terminals_per_group in &self.terminal_counts {
                    out.push(Setting { num_scenarios, num_groups, terminals_per_group });
                }
            }
        }
        out
    }

    /// Number of generated instances.
    pub fn census(&self) -> usize {
        self.settings().len() * self.seeds.len()
    }
}

/// Artificial 5×5 instance for one setting and seed.
pub fn random_artificial(setting: Setting, seed: u64) -> Result<TwoStageInstance, GenerateError> {
    random_grid(&GridSpec::artificial(setting), seed)
}

/// Two-scenario instance on a 3×3 grid with a single pipe type, small enough
/// for exhaustive search. The seed also picks one or two groups of two or
/// three terminals.
pub fn small_grid(seed: u64) -> Result<TwoStageInstance, GenerateError> {
    let spec = GridSpec {
        rows: 3,
        cols: 3,
        pipe_ratios: vec![1.0],
        num_scenarios: 2,
        num_groups: 1 + (seed % 2) as usize,
        terminals_per_group: 2 + (seed / 2 % 2) as usize,
        cost_low: 1.0,
        cost_high: 10.0,
        multiplier: 2.0,
    };
    random_grid(&spec, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_counts() {
        let g = grid_graph(1, 1).unwrap();
        assert_eq!((g.num_vertices(), g.num_edges()), (1, 0));
        let g = grid_graph(5, 5).unwrap();
        assert_eq!((g.num_vertices(), g.num_edges()), (25, 40));
        let g = grid_graph(6, 6).unwrap();
        assert_eq!((g.num_vertices(), g.num_edges()), (36, 60));
        assert_eq!(grid_graph(0, 3), Err(GenerateError::EmptyGrid));
        assert!(g.edges().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn fig2_shape() {
        let two = fig2_instance(0.5).unwrap();
        let g = two.graph();
        // oracle: count grid edges not touching a removed room
        let mut expected = 0;
        for l in 1..=36u32 {
            let (r, c) = ((l - 1) / 6, (l - 1) % 6);
            for (nr, nc) in [(r, c + 1), (r + 1, c)] {
                let m = nr * 6 + nc + 1;
                if nr < 6 && nc < 6 && !FIG2_REMOVED.contains(&l) && !FIG2_REMOVED.contains(&m) {
                    expected += 1;
                }
            }
        }
        assert_eq!(expected, 49);
        assert_eq!((g.num_vertices(), g.num_edges()), (33, 49));
        for &(u, v) in g.edges() {
            assert!(!FIG2_REMOVED.contains(&g.label(u)) && !FIG2_REMOVED.contains(&g.label(v)));
        }
        assert_eq!(two.probabilities(), &[0.5, 0.5]);
        assert!(!two.scenario(1).is_feasible_pipe(0));
    }

    #[test]
    fn four_cycle_groups() {
        let inst = four_cycle_instance().unwrap();
        let t = inst.terminals();
        assert_eq!(t.groups(), &[vec![0, 2], vec![1, 3]]);
        assert_eq!((t.root(0), t.root(1)), (0, 1));
    }

    #[test]
    fn generator_is_deterministic() {
        let s = Setting { num_scenarios: 3, num_groups: 2, terminals_per_group: 4 };
        assert_eq!(random_artificial(s, 7).unwrap(), random_artificial(s, 7).unwrap());
        assert_ne!(random_artificial(s, 7).unwrap(), random_artificial(s, 8).unwrap());
    }

    #[test]
    fn generator_shape() {
        let s = Setting { num_scenarios: 2, num_groups: 1, terminals_per_group: 3 };
        for seed in 0..5 {
            let two = random_artificial(s, seed).unwrap();
            assert_eq!(two.first_stage().terminals().groups().len(), 1);
            assert_eq!(two.first_stage().terminals().group(0).len(), 3);
            assert_eq!(two.num_scenarios(), 2);
            for e in 0..two.graph().num_edges() {
                let c = two.pipes().cost(0, e);
                assert!((1.0..10.0).contains(&c));
                assert_eq!(two.pipes().cost(1, e), 2.0 * c);
            }
        }
        let too_many = GridSpec { num_groups: 6, terminals_per_group: 5, ..GridSpec::artificial(s) };
        assert!(matches!(random_grid(&too_many, 0), Err(GenerateError::TooManyTerminals { .. })));
    }

    #[test]
    fn sweep_census() {
        let cfg = SweepConfig::full(100);
        assert_eq!(cfg.settings().len(), 27);
        assert_eq!(cfg.census(), 2700);
    }
}
