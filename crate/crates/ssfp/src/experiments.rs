//! Comparative studies: evaluating a first stage under each objective, the
//! value of the stochastic solution, expected-cost curves and the artificial
//! parameter sweep.

use std::sync::atomic::{AtomicUsize, Ordering as AtomicOrdering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use ssfp_core::graph::{cost, validate_feasible, EdgePipeSet, TwoStageInstance};
use ssfp_core::instances::{random_artificial, GenerateError, Setting, SweepConfig};
use ssfp_core::milp::SolveStatus;
use ssfp_core::models::{build, build_do, BuiltModel, Flow, ModelKind, Optimization, SizeStats, StagePairs};
use ssfp_core::{InstanceError, ModelError};
use thiserror::Error;

use crate::solver::{solve_milp, BnbConfig, SolverError, OBJECTIVE_TOLERANCE};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Generate(#[from] GenerateError),
    #[error("{kind}: solver stopped with status {status}")]
    NotSolved { kind: String, status: SolveStatus },
    #[error("first-stage solution leaves group {0} disconnected")]
    InfeasibleFirstStage(usize),
    #[error("cost curves need exactly two scenarios, got {0}")]
    NotTwoScenarios(usize),
}

/// Limits applied to every solve of a study.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    pub node_limit: u64,
    /// Solves still running then stop as if their node limit were hit.
    pub deadline: Option<Instant>,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { node_limit: BnbConfig::default().node_limit, deadline: None }
    }
}

/// Optimal solve of one model.
#[derive(Debug, Clone, PartialEq)]
pub struct Solved {
    pub kind: ModelKind,
    pub objective: f64,
    pub pairs: StagePairs,
    /// Cost of the first-stage pairs outside the pre-existing set.
    pub first_stage_cost: f64,
    pub stats: SizeStats,
    pub node_count: u64,
    pub build_time: Duration,
    pub solve_time: Duration,
}

/// Solver settings for a built model: its relaxed-integrality variables,
/// first stage first, are branched on before the binaries, so optimal points
/// come back integral in them.
pub fn model_config(built: &BuiltModel, budget: Budget) -> BnbConfig {
    BnbConfig {
        node_limit: budget.node_limit,
        deadline: budget.deadline,
        priority: built.implied_integral().to_vec(),
        ..BnbConfig::default()
    }
}

/// Builds and solves `kind` to optimality.
pub fn solve_model(kind: ModelKind, two: &TwoStageInstance, budget: Budget) -> Result<Solved, ExperimentError> {
    let start = Instant::now();
    let built = build(kind, two)?;
    let build_time = start.elapsed();
    let config = model_config(&built, budget);
    let solution = solve_milp(&built.milp, &config)?;
    if solution.status != SolveStatus::Optimal {
        return Err(ExperimentError::NotSolved { kind: kind.to_string(), status: solution.status });
    }
    let pairs = built.extract(&solution.values);
    let first_stage_cost = cost(two.first_stage(), two.existing(), &pairs.first)?;
    Ok(Solved {
        kind,
        objective: solution.objective,
        pairs,
        first_stage_cost,
        stats: built.stats,
        node_count: solution.node_count,
        build_time,
        solve_time: solution.solve_time,
    })
}

/// Cheapest completion of scenario `s` on top of `installed`, at the
/// scenario's inflated costs.
pub fn recourse_cost(
    two: &TwoStageInstance,
    s: usize,
    installed: &EdgePipeSet,
    budget: Budget,
) -> Result<f64, ExperimentError> {
    let scenario = two.scenario(s);
    let existing = installed.union(two.existing());
    if validate_feasible(scenario, &existing)?.is_feasible() {
        return Ok(0.0);
    }
    let built = build_do(scenario, &existing, Flow::Directed)?;
    let config = model_config(&built, budget);
    let solution = solve_milp(&built.milp, &config)?;
    if solution.status != SolveStatus::Optimal {
        return Err(ExperimentError::NotSolved {
            kind: format!("recourse of scenario {}", s + 1),
            status: solution.status,
        });
    }
    Ok(solution.objective)
}

/// Objective value of a fixed first stage: its cost alone (DO), plus the
/// worst optimal recourse (RO), or plus the expected optimal recourse (SO).
pub fn evaluate_under(
    objective: Optimization,
    two: &TwoStageInstance,
    first_stage: &EdgePipeSet,
    budget: Budget,
) -> Result<f64, ExperimentError> {
    let check = validate_feasible(two.first_stage(), &first_stage.union(two.existing()))?;
    if let Some(&k) = check.disconnected_groups.first() {
        return Err(ExperimentError::InfeasibleFirstStage(k));
    }
    let stage_one = cost(two.first_stage(), two.existing(), first_stage)?;
    let recourse = |s| recourse_cost(two, s, first_stage, budget);
    Ok(match objective {
        Optimization::Deterministic => stage_one,
        Optimization::Robust => {
            let mut worst: f64 = 0.0;
            for s in 0..two.num_scenarios() {
                worst = worst.max(recourse(s)?);
            }
            stage_one + worst
        }
        Optimization::Stochastic => {
            let mut expected = 0.0;
            for (s, &rho) in two.probabilities().iter().enumerate() {
                if rho > 0.0 {
                    expected += rho * recourse(s)?;
                }
            }
            stage_one + expected
        }
    })
}

/// Value of the stochastic solution at the instance's probabilities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vss {
    /// Expected cost of the deterministic first stage with optimal recourse.
    pub eevs: f64,
    pub so_optimum: f64,
    pub vss: f64,
}

pub fn vss(two: &TwoStageInstance, budget: Budget) -> Result<Vss, ExperimentError> {
    let det = solve_model(ModelKind::new(Optimization::Deterministic, Flow::Directed), two, budget)?;
    let so = solve_model(ModelKind::new(Optimization::Stochastic, Flow::Directed), two, budget)?;
    vss_from(two, &det.pairs.first, so.objective, budget)
}

fn vss_from(
    two: &TwoStageInstance,
    det_first: &EdgePipeSet,
    so_optimum: f64,
    budget: Budget,
) -> Result<Vss, ExperimentError> {
    let eevs = evaluate_under(Optimization::Stochastic, two, det_first, budget)?;
    Ok(Vss { eevs, so_optimum, vss: eevs - so_optimum })
}

/// Expected cost of one first stage as a line in `ρ₂`.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub first_stage: EdgePipeSet,
    pub first_stage_cost: f64,
    /// Optimal recourse in scenario 1 and scenario 2.
    pub recourse: [f64; 2],
}

impl Candidate {
    /// `E R(ρ₂) = c₁ + (1 − ρ₂)·r₁ + ρ₂·r₂`.
    pub fn expected(&self, rho2: f64) -> f64 {
        self.first_stage_cost + (1.0 - rho2) * self.recourse[0] + rho2 * self.recourse[1]
    }

    fn intercept(&self) -> f64 {
        self.first_stage_cost + self.recourse[0]
    }

    fn slope(&self) -> f64 {
        self.recourse[1] - self.recourse[0]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow {
    pub rho2: f64,
    /// Expected cost of every candidate, in candidate order.
    pub expected: Vec<f64>,
    pub so_optimum: f64,
    /// Value of the stochastic solution at this `ρ₂`.
    pub vss: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveTable {
    /// The deterministic optimum first, then the robust one, then every other
    /// first stage that is stochastically optimal somewhere on the grid.
    pub candidates: Vec<Candidate>,
    pub rows: Vec<CurveRow>,
    /// `ρ₂` values in `(0, 1)` where the cheapest candidate changes, in
    /// increasing order.
    pub intersections: Vec<f64>,
}

/// Expected-cost lines of the candidate first stages over a grid of `ρ₂`,
/// with the stochastic optimum at every grid point. The candidates are the DO
/// and RO first stages, the SO first stage at every grid point, and the SO
/// first stage at every envelope breakpoint that undercuts the envelope, so
/// the reported breakpoints do not depend on the grid.
pub fn cost_curves(two: &TwoStageInstance, grid: &[f64], budget: Budget) -> Result<CurveTable, ExperimentError> {
    if two.num_scenarios() != 2 {
        return Err(ExperimentError::NotTwoScenarios(two.num_scenarios()));
    }
    let d = Flow::Directed;
    let det = solve_model(ModelKind::new(Optimization::Deterministic, d), two, budget)?;
    let ro = solve_model(ModelKind::new(Optimization::Robust, d), two, budget)?;
    let mut candidates: Vec<Candidate> = Vec::new();
    let add = |first: &EdgePipeSet, candidates: &mut Vec<Candidate>| -> Result<usize, ExperimentError> {
        if let Some(i) = candidates.iter().position(|c| &c.first_stage == first) {
            return Ok(i);
        }
        let recourse = [recourse_cost(two, 0, first, budget)?, recourse_cost(two, 1, first, budget)?];
        candidates.push(Candidate {
            first_stage: first.clone(),
            first_stage_cost: cost(two.first_stage(), two.existing(), first)?,
            recourse,
        });
        Ok(candidates.len() - 1)
    };
    add(&det.pairs.first, &mut candidates)?;
    add(&ro.pairs.first, &mut candidates)?;
    let mut optima = Vec::with_capacity(grid.len());
    for &rho2 in grid {
        let at = two.with_rho2(rho2)?;
        let so = solve_model(ModelKind::new(Optimization::Stochastic, d), &at, budget)?;
        add(&so.pairs.first, &mut candidates)?;
        optima.push(so.objective);
    }
    loop {
        let before = candidates.len();
        for rho2 in envelope_breakpoints(&candidates) {
            let envelope = candidates.iter().map(|c| c.expected(rho2)).fold(f64::INFINITY, f64::min);
            let so = solve_model(ModelKind::new(Optimization::Stochastic, d), &two.with_rho2(rho2)?, budget)?;
            if so.objective < envelope - OBJECTIVE_TOLERANCE * envelope.abs().max(1.0) {
                add(&so.pairs.first, &mut candidates)?;
            }
        }
        if candidates.len() == before {
            break;
        }
    }
    let rows = grid
        .iter()
        .zip(optima)
        .map(|(&rho2, so_optimum)| CurveRow {
            rho2,
            expected: candidates.iter().map(|c| c.expected(rho2)).collect(),
            so_optimum,
            vss: candidates[0].expected(rho2) - so_optimum,
        })
        .collect();
    let intersections = envelope_breakpoints(&candidates);
    Ok(CurveTable { candidates, rows, intersections })
}

/// Breakpoints of the lower envelope of the candidate lines on `[0, 1]`.
fn envelope_breakpoints(candidates: &[Candidate]) -> Vec<f64> {
    const EPS: f64 = 1e-12;
    let cheapest_at = |rho: f64, slope_tiebreak: f64| -> Option<usize> {
        (0..candidates.len()).min_by(|&a, &b| {
            let (ca, cb) = (&candidates[a], &candidates[b]);
            let diff = ca.expected(rho) - cb.expected(rho);
            if diff.abs() > EPS * (1.0 + ca.expected(rho).abs()) {
                diff.total_cmp(&0.0)
            } else {
                (slope_tiebreak * ca.slope()).total_cmp(&(slope_tiebreak * cb.slope()))
            }
        })
    };
    let mut out = Vec::new();
    let mut rho = 0.0;
    let Some(mut current) = cheapest_at(0.0, 1.0) else {
        return out;
    };
    loop {
        // next line to undercut the current one to the right of rho
        let mut next: Option<(f64, usize)> = None;
        for (j, cand) in candidates.iter().enumerate() {
            let slope_gap = candidates[current].slope() - cand.slope();
            if slope_gap <= EPS {
                continue;
            }
            let at = (cand.intercept() - candidates[current].intercept()) / slope_gap;
            if at > rho + EPS && at < 1.0 - EPS && next.is_none_or(|(best, _)| at < best - EPS) {
                next = Some((at, j));
            }
        }
        let Some((at, _)) = next else { break };
        out.push(at);
        rho = at;
        match cheapest_at(at, 1.0) {
            Some(j) if j != current => current = j,
            _ => break,
        }
    }
    out
}

/// Evaluation order of models and objectives in the cross-objective matrix.
pub const OBJECTIVES: [Optimization; 3] = [Optimization::Deterministic, Optimization::Robust, Optimization::Stochastic];

/// One instance of the sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub setting: Setting,
    pub seed: u64,
    /// DO, RO and SO optima.
    pub optimum: [f64; 3],
    /// First-stage cost of the DO, RO and SO solutions.
    pub first_stage_cost: [f64; 3],
    /// `value[r][c]`: solution of model `r` evaluated under objective `c`.
    pub cross_value: [[f64; 3]; 3],
    /// Every solved model with its flow formulation, in [`ModelKind::ALL`]
    /// order when both flows are solved.
    pub models: Vec<Solved>,
    /// Sizes of all six builds, in [`ModelKind::ALL`] order.
    pub sizes: Vec<(ModelKind, SizeStats)>,
    /// Directed/undirected disagreement on any objective.
    pub flow_gap: f64,
}

impl SweepRecord {
    /// `cross_value[r][c] / optimum[c]`.
    pub fn cross_ratio(&self) -> [[f64; 3]; 3] {
        let mut out = [[0.0; 3]; 3];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, entry) in row.iter_mut().enumerate() {
                *entry = self.cross_value[r][c] / self.optimum[c];
            }
        }
        out
    }

    /// RO first-stage cost over DO first-stage cost.
    pub fn ro_do_ratio(&self) -> f64 {
        self.first_stage_cost[1] / self.first_stage_cost[0]
    }

    /// Expected cost of the DO first stage minus the SO optimum.
    pub fn vss(&self) -> f64 {
        self.cross_value[0][2] - self.optimum[2]
    }
}

/// A record that could not be completed.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("setting {}-{}-{} seed {seed}: {reason}", setting.num_scenarios, setting.num_groups, setting.terminals_per_group)]
pub struct RecordFailure {
    pub setting: Setting,
    pub seed: u64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOptions {
    pub threads: usize,
    pub flows: Vec<Flow>,
    /// Records not started by the deadline fail with a budget diagnostic.
    pub budget: Budget,
    /// Wall-clock cap of a single record.
    pub record_limit: Option<Duration>,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            threads: default_threads(),
            flows: vec![Flow::Directed],
            budget: Budget::default(),
            record_limit: None,
        }
    }
}

/// `SSFP_THREADS` if set, otherwise the available parallelism.
pub fn default_threads() -> usize {
    std::env::var("SSFP_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Aggregate cross-objective matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossObjectiveMatrix {
    /// Entrywise mean of the per-instance ratios.
    pub mean_of_ratios: [[f64; 3]; 3],
    /// Mean evaluated value over mean optimum, per entry.
    pub ratio_of_means: [[f64; 3]; 3],
    pub records: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    /// One entry per (setting, seed), ordered by setting then seed.
    pub outcomes: Vec<Result<SweepRecord, RecordFailure>>,
    /// Over the completed records; `None` when there are none.
    pub matrix: Option<CrossObjectiveMatrix>,
}

impl SweepResult {
    pub fn records(&self) -> impl Iterator<Item = &SweepRecord> {
        self.outcomes.iter().filter_map(|o| o.as_ref().ok())
    }

    pub fn failures(&self) -> impl Iterator<Item = &RecordFailure> {
        self.outcomes.iter().filter_map(|o| o.as_ref().err())
    }
}

/// Generates and solves one sweep instance.
pub fn run_record(setting: Setting, seed: u64, options: &SweepOptions) -> Result<SweepRecord, ExperimentError> {
    let two = random_artificial(setting, seed)?;
    let mut limit = options.budget;
    if let Some(cap) = options.record_limit {
        let own = Instant::now() + cap;
        limit.deadline = Some(limit.deadline.map_or(own, |d| d.min(own)));
    }
    let mut models = Vec::new();
    for kind in ModelKind::ALL {
        if options.flows.contains(&kind.flow) {
            models.push(solve_model(kind, &two, limit)?);
        }
    }
    let sizes = ModelKind::ALL
        .iter()
        .map(|&kind| match models.iter().find(|m| m.kind == kind) {
            Some(m) => Ok((kind, m.stats)),
            None => Ok((kind, build(kind, &two)?.stats)),
        })
        .collect::<Result<Vec<_>, ExperimentError>>()?;
    let mut flow_gap: f64 = 0.0;
    for a in &models {
        for b in &models {
            if a.kind.optimization == b.kind.optimization {
                flow_gap = flow_gap.max((a.objective - b.objective).abs());
            }
        }
    }
    let pick = |o: Optimization| -> &Solved {
        let preferred = options.flows.first().copied().unwrap_or(Flow::Directed);
        models
            .iter()
            .find(|m| m.kind == ModelKind::new(o, preferred))
            .expect("every objective is solved in the preferred flow")
    };
    let chosen = OBJECTIVES.map(pick);
    let mut cross_value = [[0.0; 3]; 3];
    for (r, model) in chosen.iter().enumerate() {
        for (c, &objective) in OBJECTIVES.iter().enumerate() {
            cross_value[r][c] = evaluate_under(objective, &two, &model.pairs.first, limit)?;
        }
    }
    Ok(SweepRecord {
        setting,
        seed,
        optimum: chosen.map(|m| m.objective),
        first_stage_cost: chosen.map(|m| m.first_stage_cost),
        cross_value,
        models,
        sizes,
        flow_gap,
    })
}

/// Runs every (setting, seed) of `config`, in parallel when allowed, and
/// aggregates the completed records in (setting, seed) order.
pub fn run_sweep(config: &SweepConfig, options: &SweepOptions) -> SweepResult {
    let jobs: Vec<(Setting, u64)> =
        config.settings().into_iter().flat_map(|s| config.seeds.iter().map(move |&seed| (s, seed))).collect();
    let slots: Vec<Mutex<Option<Result<SweepRecord, RecordFailure>>>> = jobs.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    let work = || loop {
        let i = next.fetch_add(1, AtomicOrdering::Relaxed);
        let Some(&(setting, seed)) = jobs.get(i) else { break };
        let outcome = if options.budget.deadline.is_some_and(|d| Instant::now() >= d) {
            Err(RecordFailure { setting, seed, reason: "time budget exhausted before the record started".into() })
        } else {
            run_record(setting, seed, options).map_err(|e| RecordFailure { setting, seed, reason: e.to_string() })
        };
        *slots[i].lock().expect("no panics while holding the lock") = Some(outcome);
    };
    let threads = options.threads.max(1).min(jobs.len().max(1));
    std::thread::scope(|scope| {
        for _ in 0..threads {
            scope.spawn(work);
        }
    });
    let outcomes: Vec<_> =
        slots.into_iter().map(|m| m.into_inner().expect("no poisoned slots").expect("every job ran")).collect();
    let matrix = aggregate(outcomes.iter().filter_map(|o| o.as_ref().ok()));
    SweepResult { outcomes, matrix }
}

/// Entrywise aggregation of the cross-objective ratios.
pub fn aggregate<'a>(records: impl IntoIterator<Item = &'a SweepRecord>) -> Option<CrossObjectiveMatrix> {
    let mut ratio_sum = [[0.0; 3]; 3];
    let mut value_sum = [[0.0; 3]; 3];
    let mut optimum_sum = [0.0; 3];
    let mut n = 0usize;
    for record in records {
        let ratio = record.cross_ratio();
        for r in 0..3 {
            for c in 0..3 {
                ratio_sum[r][c] += ratio[r][c];
                value_sum[r][c] += record.cross_value[r][c];
            }
        }
        for (sum, x) in optimum_sum.iter_mut().zip(record.optimum) {
            *sum += x;
        }
        n += 1;
    }
    if n == 0 {
        return None;
    }
    let mut mean_of_ratios = [[0.0; 3]; 3];
    let mut ratio_of_means = [[0.0; 3]; 3];
    for r in 0..3 {
        for c in 0..3 {
            mean_of_ratios[r][c] = ratio_sum[r][c] / n as f64;
            ratio_of_means[r][c] = value_sum[r][c] / optimum_sum[c];
        }
    }
    Some(CrossObjectiveMatrix { mean_of_ratios, ratio_of_means, records: n })
}

/// Evenly spaced grid `start, start + step, …` up to `end` inclusive,
/// computed as `start + i·step` so no error accumulates.
pub fn rho_grid(start: f64, end: f64, step: f64) -> Vec<f64> {
    if step.is_nan() || step <= 0.0 || end < start {
        return vec![start];
    }
    let n = ((end - start) / step + 1e-9).floor() as usize;
    (0..=n).map(|i| (start + i as f64 * step).min(end)).collect()
}
