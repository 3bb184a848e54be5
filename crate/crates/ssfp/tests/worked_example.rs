use ssfp::experiments::{cost_curves, evaluate_under, rho_grid, solve_model, vss, Budget};
use ssfp_core::instances::fig2_instance;
use ssfp_core::models::{Flow, ModelKind, Optimization};

const LIMIT: Budget = Budget { node_limit: 1_000_000, deadline: None };

fn lines(rho2: f64) -> [f64; 3] {
    [4.0 + 16.0 * rho2, 11.0, 9.0 + 4.0 * rho2]
}

#[test]
fn optima_of_all_six_models() {
    for rho2 in [0.0, 0.45, 0.5, 1.0] {
        let two = fig2_instance(rho2).unwrap();
        let expected_so = lines(rho2).into_iter().fold(f64::INFINITY, f64::min);
        for kind in ModelKind::ALL {
            let got = solve_model(kind, &two, LIMIT).unwrap().objective;
            let want = match kind.optimization {
                Optimization::Deterministic => 4.0,
                Optimization::Robust => 11.0,
                Optimization::Stochastic => expected_so,
            };
            assert!((got - want).abs() < 1e-7, "{kind} at rho2 {rho2}: {got} vs {want}");
        }
    }
}

#[test]
fn routes_follow_their_lines() {
    let two = fig2_instance(0.5).unwrap();
    let d = Flow::Directed;
    let det = solve_model(ModelKind::new(Optimization::Deterministic, d), &two, LIMIT).unwrap();
    let ro = solve_model(ModelKind::new(Optimization::Robust, d), &two, LIMIT).unwrap();
    let middle =
        solve_model(ModelKind::new(Optimization::Stochastic, d), &fig2_instance(0.45).unwrap(), LIMIT).unwrap();
    for rho2 in [0.0, 0.3, 0.45, 0.8, 1.0] {
        let at = fig2_instance(rho2).unwrap();
        let [a, b, c] = lines(rho2);
        let so = |first| evaluate_under(Optimization::Stochastic, &at, first, LIMIT).unwrap();
        assert!((so(&det.pairs.first) - a).abs() < 1e-9);
        assert!((so(&ro.pairs.first) - b).abs() < 1e-9);
        assert!((so(&middle.pairs.first) - c).abs() < 1e-9);
    }
    assert!((evaluate_under(Optimization::Robust, &two, &ro.pairs.first, LIMIT).unwrap() - 11.0).abs() < 1e-9);
    assert!((evaluate_under(Optimization::Deterministic, &two, &det.pairs.first, LIMIT).unwrap() - 4.0).abs() < 1e-9);
}

#[test]
fn curves_and_intersections() {
    let two = fig2_instance(0.5).unwrap();
    let grid = rho_grid(0.0, 1.0, 0.05);
    let table = cost_curves(&two, &grid, LIMIT).unwrap();
    assert_eq!(table.candidates.len(), 3);
    assert_eq!(table.intersections.len(), 2);
    assert!((table.intersections[0] - 5.0 / 12.0).abs() <= 1e-9);
    assert!((table.intersections[1] - 0.5).abs() <= 1e-9);
    for row in &table.rows {
        let envelope = row.expected.iter().copied().fold(f64::INFINITY, f64::min);
        assert!((row.so_optimum - envelope).abs() < 1e-9, "rho2 {}", row.rho2);
    }
}

#[test]
fn value_of_the_stochastic_solution() {
    let at_zero = vss(&fig2_instance(0.0).unwrap(), LIMIT).unwrap();
    assert!(at_zero.vss.abs() < 1e-9);
    let at_one = vss(&fig2_instance(1.0).unwrap(), LIMIT).unwrap();
    assert!((at_one.vss - 9.0).abs() < 1e-9);
    assert!((at_one.eevs - 20.0).abs() < 1e-9);
}

#[test]
fn breakpoints_do_not_depend_on_the_grid() {
    let two = fig2_instance(0.5).unwrap();
    for grid in [vec![0.0, 1.0], rho_grid(0.0, 1.0, 0.1)] {
        let table = cost_curves(&two, &grid, LIMIT).unwrap();
        assert_eq!(table.intersections.len(), 2, "grid {grid:?}");
        assert!((table.intersections[0] - 5.0 / 12.0).abs() <= 1e-9);
        assert!((table.intersections[1] - 0.5).abs() <= 1e-9);
    }
}
