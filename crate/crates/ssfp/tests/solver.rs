use std::time::Instant;

use ssfp::experiments::{model_config, Budget};
use ssfp::solver::{solve_lp, solve_milp, solve_milp_highs, solve_milp_traced, BnbConfig, SolverError};
use ssfp_core::graph::EdgePipeSet;
use ssfp_core::instances::{fig2_instance, four_cycle_instance, four_cycle_two_stage, small_grid};
use ssfp_core::milp::{relax, MilpModel, Sense, SolveStatus};
use ssfp_core::models::{build, build_do, Flow, ModelKind, Optimization};

#[test]
fn one_variable_lp() {
    let mut m = MilpModel::new();
    let x = m.add_continuous("x", 0.0, 10.0, 1.0).unwrap();
    m.add_constraint("c", [(x, 1.0)], Sense::Ge, 3.0).unwrap();
    let sol = solve_lp(&m).unwrap();
    assert_eq!(sol.status, SolveStatus::Optimal);
    assert!((sol.objective - 3.0).abs() < 1e-12);
    assert!((sol.value(x) - 3.0).abs() < 1e-12);
}

#[test]
fn lp_rejects_binaries() {
    let mut m = MilpModel::new();
    m.add_binary("b", 1.0).unwrap();
    assert!(matches!(solve_lp(&m), Err(SolverError::NotContinuous(_))));
}

#[test]
fn infeasible_and_unbounded_models() {
    let mut m = MilpModel::new();
    let b = m.add_binary("b", 1.0).unwrap();
    m.add_constraint("c", [(b, 1.0)], Sense::Ge, 2.0).unwrap();
    assert_eq!(solve_milp(&m, &BnbConfig::default()).unwrap().status, SolveStatus::Infeasible);

    let mut m = MilpModel::new();
    m.add_continuous("y", f64::NEG_INFINITY, f64::INFINITY, 1.0).unwrap();
    assert_eq!(solve_lp(&m).unwrap().status, SolveStatus::Unbounded);

    let mut m = MilpModel::new();
    let b = m.add_binary("b", 1.0).unwrap();
    m.add_constraint("empty", [], Sense::Ge, 1.0).unwrap();
    m.add_constraint("c", [(b, 1.0)], Sense::Le, 1.0).unwrap();
    assert_eq!(solve_milp(&m, &BnbConfig::default()).unwrap().status, SolveStatus::Infeasible);
}

#[test]
fn knapsack_needs_branching() {
    // max 5a + 4b + 3c s.t. 2a + 3b + c <= 5 and 4a + b + 2c <= 5; optimum a = b = 1
    let mut m = MilpModel::new();
    let v: Vec<_> =
        [("a", -5.0), ("b", -4.0), ("c", -3.0)].into_iter().map(|(n, c)| m.add_binary(n, c).unwrap()).collect();
    m.add_constraint("r1", [(v[0], 2.0), (v[1], 3.0), (v[2], 1.0)], Sense::Le, 5.0).unwrap();
    m.add_constraint("r2", [(v[0], 4.0), (v[1], 1.0), (v[2], 2.0)], Sense::Le, 5.0).unwrap();
    let sol = solve_milp(&m, &BnbConfig { dive: false, ..BnbConfig::default() }).unwrap();
    assert!(sol.is_optimal());
    assert!((sol.objective + 9.0).abs() < 1e-9);
    assert_eq!(sol.values.iter().map(|x| x.round() as i32).collect::<Vec<_>>(), [1, 1, 0]);
}

#[test]
fn zero_node_limit_is_an_error() {
    let m = MilpModel::new();
    let config = BnbConfig { node_limit: 0, ..BnbConfig::default() };
    assert_eq!(solve_milp(&m, &config), Err(SolverError::ZeroNodeLimit));
}

#[test]
fn node_limit_and_deadline_stop_the_search() {
    let two = small_grid(3).unwrap();
    let built = build(ModelKind::new(Optimization::Stochastic, Flow::Undirected), &two).unwrap();
    let one = BnbConfig { node_limit: 1, dive: false, ..BnbConfig::default() };
    let sol = solve_milp(&built.milp, &one).unwrap();
    if sol.status == SolveStatus::NodeLimit {
        assert!(sol.bound <= sol.objective || sol.values.is_empty());
    } else {
        assert!(sol.is_optimal());
    }
    let past = BnbConfig { deadline: Some(Instant::now()), dive: false, ..BnbConfig::default() };
    let sol = solve_milp(&built.milp, &past).unwrap();
    assert!(matches!(sol.status, SolveStatus::NodeLimit | SolveStatus::Optimal));
    assert!(sol.node_count <= 1);
}

#[test]
fn fig2_diesel_relaxation_is_the_shortest_path() {
    let two = fig2_instance(0.5).unwrap();
    let diesel = two.scenario(0).with_multiplier(1.0).unwrap();
    for flow in [Flow::Undirected, Flow::Directed] {
        let built = build_do(&diesel, &EdgePipeSet::new(), flow).unwrap();
        let lp = solve_lp(&relax(&built.milp)).unwrap();
        assert!((lp.objective - 4.0).abs() < 1e-9, "{flow:?}: {}", lp.objective);
    }
}

#[test]
fn four_cycle_relaxations() {
    let inst = four_cycle_instance().unwrap();
    let none = EdgePipeSet::new();
    let lp = |flow| solve_lp(&relax(&build_do(&inst, &none, flow).unwrap().milp)).unwrap().objective;
    let (u, d) = (lp(Flow::Undirected), lp(Flow::Directed));
    assert!(u <= 2.0 + 1e-7, "undirected relaxation {u}");
    assert!(d >= u + 0.1, "directed {d} vs undirected {u}");
    for flow in [Flow::Undirected, Flow::Directed] {
        let built = build_do(&inst, &none, flow).unwrap();
        let sol = solve_milp(&built.milp, &BnbConfig::default()).unwrap();
        assert!((sol.objective - 3.0).abs() < 1e-9, "{flow:?}");
    }
    let two = four_cycle_two_stage().unwrap();
    let built = build(ModelKind::new(Optimization::Stochastic, Flow::Directed), &two).unwrap();
    assert!((solve_milp(&built.milp, &BnbConfig::default()).unwrap().objective - 3.0).abs() < 1e-9);
}

#[test]
fn node_trace_is_deterministic() {
    for seed in [2, 5, 11] {
        let two = small_grid(seed).unwrap();
        let built = build(ModelKind::new(Optimization::Robust, Flow::Undirected), &two).unwrap();
        let config = BnbConfig { dive: false, ..BnbConfig::default() };
        let (a, ta) = solve_milp_traced(&built.milp, &config).unwrap();
        let (b, tb) = solve_milp_traced(&built.milp, &config).unwrap();
        assert_eq!(ta, tb, "seed {seed}");
        assert_eq!(a.values, b.values);
        assert_eq!(a.node_count as usize, ta.len());
    }
}

#[test]
fn start_point_is_used_as_incumbent() {
    let two = small_grid(6).unwrap();
    let built = build(ModelKind::new(Optimization::Stochastic, Flow::Directed), &two).unwrap();
    let config = model_config(&built, Budget::default());
    let first = solve_milp(&built.milp, &config).unwrap();
    let warm = BnbConfig { start: Some(first.values.clone()), dive: false, ..config.clone() };
    let second = solve_milp(&built.milp, &warm).unwrap();
    assert!((first.objective - second.objective).abs() < 1e-9);
    let junk = BnbConfig { start: Some(vec![0.5; built.milp.num_variables()]), ..config };
    assert!((solve_milp(&built.milp, &junk).unwrap().objective - first.objective).abs() < 1e-9);
}

#[test]
fn agrees_with_the_highs_mip_engine() {
    for seed in 0..20 {
        let two = small_grid(seed).unwrap();
        for kind in ModelKind::ALL {
            let built = build(kind, &two).unwrap();
            let ours = solve_milp(&built.milp, &model_config(&built, Budget::default())).unwrap();
            let theirs = solve_milp_highs(&built.milp, &BnbConfig::default()).unwrap();
            assert!(ours.is_optimal() && theirs.is_optimal(), "seed {seed} {kind}");
            assert!((ours.objective - theirs.objective).abs() <= 1e-6, "seed {seed} {kind}");
        }
    }
}
