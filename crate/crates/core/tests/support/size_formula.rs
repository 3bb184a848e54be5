use ssfp_core::graph::{Instance, TwoStageInstance};
use ssfp_core::models::{Flow, ModelKind, Optimization};

/// Closed-form (variables, constraints) of one stage block, written from the
/// structural parameters of the instance only.
pub fn stage_size(inst: &Instance, flow: Flow) -> (usize, usize) {
    let n = inst.graph().num_vertices();
    let x = inst.num_pipe_types() * inst.graph().num_edges();
    let pf = inst.num_feasible_pipes();
    let ea = inst.num_admissible_edges();
    let arcs = 2 * ea;
    let sizes: Vec<usize> = inst.terminals().groups().iter().map(Vec::len).collect();
    let k = sizes.len();
    let t: usize = sizes.iter().sum();
    match flow {
        Flow::Undirected => {
            let sinks = t - k;
            (x + sinks * pf * arcs, sinks * n + sinks * pf * ea)
        }
        Flow::Directed => {
            // commodities of group k: terminals of groups k.. except r^k
            let commodities: usize = (0..k).map(|g| sizes[g..].iter().sum::<usize>() - 1).sum();
            let earlier: usize = (0..k).map(|g| sizes[..g].iter().sum::<usize>()).sum();
            let pairs = k * (k.saturating_sub(1)) / 2;
            let vars = x + commodities * pf * arcs + k * pf * arcs + pf * arcs + k * (k + 1) / 2;
            let cons = commodities * n
                + commodities * pf * arcs
                + pf * arcs
                + pf * ea
                + k
                + k.saturating_sub(1) * k.saturating_sub(2) / 2
                + n
                + earlier
                + commodities
                + (n - t)
                + (k * n - commodities)
                + pf * pairs;
            (vars, cons)
        }
    }
}

/// Closed-form (variables, constraints) of a whole build.
pub fn expected_size(kind: ModelKind, two: &TwoStageInstance) -> (usize, usize) {
    let first = stage_size(two.first_stage(), kind.flow);
    if kind.optimization == Optimization::Deterministic {
        return first;
    }
    let x = two.first_stage().num_pipe_types() * two.first_stage().graph().num_edges();
    let (mut vars, mut cons) = first;
    for s in 0..two.num_scenarios() {
        let (v, c) = stage_size(two.scenario(s), kind.flow);
        vars += v;
        cons += c + x;
    }
    if kind.optimization == Optimization::Robust {
        vars += 1;
        cons += two.num_scenarios();
    }
    (vars, cons)
}
