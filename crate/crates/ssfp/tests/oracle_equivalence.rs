use ssfp::experiments::{model_config, Budget};
use ssfp::solver::{brute_force, solve_lp, solve_milp, BnbConfig};
use ssfp_core::graph::{validate_feasible, EdgePipeSet, Instance, TwoStageInstance};
use ssfp_core::instances::small_grid;
use ssfp_core::milp::relax;
use ssfp_core::models::{build, Flow, ModelKind, Optimization};

const CORPUS: u64 = 200;

fn corpus(seed: u64) -> TwoStageInstance {
    let two = small_grid(seed).unwrap();
    two.with_rho2((seed % 5) as f64 / 4.0).unwrap()
}

/// Breadth-first search over the usable pairs, independent of the union-find
/// validator.
fn groups_connected(inst: &Instance, pairs: &EdgePipeSet) -> bool {
    let graph = inst.graph();
    let n = graph.num_vertices();
    let mut adjacent = vec![Vec::new(); n];
    for (p, e) in pairs.iter() {
        if inst.is_feasible_pipe(p) && inst.is_admissible(e) {
            let (u, v) = graph.edge(e);
            adjacent[u].push(v);
            adjacent[v].push(u);
        }
    }
    inst.terminals().groups().iter().all(|group| {
        let mut seen = vec![false; n];
        let mut stack = vec![group[0]];
        seen[group[0]] = true;
        while let Some(u) = stack.pop() {
            for &v in &adjacent[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        group.iter().all(|&t| seen[t])
    })
}

#[test]
fn milp_optima_match_exhaustive_search() {
    for seed in 0..CORPUS {
        let two = corpus(seed);
        for mode in [Optimization::Deterministic, Optimization::Robust, Optimization::Stochastic] {
            let oracle = brute_force(&two, mode).unwrap().objective;
            for flow in [Flow::Undirected, Flow::Directed] {
                let kind = ModelKind::new(mode, flow);
                let built = build(kind, &two).unwrap();
                let plain = solve_milp(&built.milp, &BnbConfig::default()).unwrap();
                assert!(plain.is_optimal(), "seed {seed} {kind}: {}", plain.status);
                let gap = (plain.objective - oracle).abs();
                assert!(gap <= 1e-9 * oracle.abs().max(1.0), "seed {seed} {kind}: {} vs {oracle}", plain.objective);

                let solution = solve_milp(&built.milp, &model_config(&built, Budget::default())).unwrap();
                assert!(
                    (solution.objective - oracle).abs() <= 1e-9 * oracle.abs().max(1.0),
                    "seed {seed} {kind} with priority"
                );

                for &v in built.implied_integral() {
                    let x = solution.values[v.0];
                    assert!(x.min(1.0 - x).abs() <= 1e-6, "seed {seed} {kind}: relaxed variable at {x}");
                }
                let pairs = built.extract(&solution.values);
                assert!(validate_feasible(two.first_stage(), &pairs.first).unwrap().is_feasible());
                for (s, later) in pairs.scenarios.iter().enumerate() {
                    assert!(validate_feasible(two.scenario(s), later).unwrap().is_feasible());
                }
            }
        }
    }
}

#[test]
fn directed_relaxation_dominates() {
    for seed in 0..CORPUS {
        let two = corpus(seed);
        for mode in [Optimization::Deterministic, Optimization::Robust, Optimization::Stochastic] {
            let lp = |flow| {
                let built = build(ModelKind::new(mode, flow), &two).unwrap();
                solve_lp(&relax(&built.milp)).unwrap().objective
            };
            let (u, d) = (lp(Flow::Undirected), lp(Flow::Directed));
            assert!(d >= u - 1e-7, "seed {seed} {mode}: directed {d} below undirected {u}");
        }
    }
}

#[test]
fn validator_rejects_broken_solutions() {
    for seed in 0..CORPUS {
        let two = corpus(seed);
        let inst = two.first_stage();
        let built = build(ModelKind::new(Optimization::Deterministic, Flow::Directed), &two).unwrap();
        let solution = solve_milp(&built.milp, &BnbConfig::default()).unwrap();
        let used = built.extract(&solution.values).first;
        assert!(groups_connected(inst, &used));
        for (p, e) in used.iter() {
            let mut broken = used.clone();
            broken.remove(p, e);
            let verdict = validate_feasible(inst, &broken).unwrap().is_feasible();
            assert_eq!(verdict, groups_connected(inst, &broken), "seed {seed} pair ({p}, {e})");
            // an optimal forest has no redundant pair
            assert!(!verdict, "seed {seed}: pair ({p}, {e}) is not needed");
        }
    }
}
