//! Solve reports and the CSV tables written by the experiments.
//!
//! `sweep.csv` has one row per (setting, seed) in this column order:
//! `setting, scenarios, groups, terminals, seed, status`, the DO/RO/SO optima
//! `opt_do, opt_ro, opt_so`, first-stage costs `first_do, first_ro,
//! first_so`, evaluated values `value_<model>_<objective>` and ratios
//! `ratio_<model>_<objective>` for every model and objective, `vss`,
//! `flow_gap`, then `vars_<kind>, cons_<kind>, nodes_<kind>` for the six
//! model kinds. A failed record keeps its key columns and the diagnostic in
//! `status`; every other field is empty. Timings go to `timings.csv` so the
//! other tables are reproducible byte for byte.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;
use ssfp_core::milp::MilpSolution;
use ssfp_core::models::{BuiltModel, ModelKind};

use crate::experiments::{CurveTable, SweepResult};
use crate::io::pairs_to_file;

/// JSON written by `solve`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    pub model: String,
    pub status: String,
    /// `null` when no feasible point was found.
    pub objective: Option<f64>,
    pub bound: f64,
    pub lp_bound: f64,
    pub node_count: u64,
    pub variables: usize,
    pub constraints: usize,
    /// `[pipe, edge]` pairs of the first stage, pre-existing pairs included.
    pub first_stage: Vec<[usize; 2]>,
    /// Everything installed once each scenario is realised.
    pub scenarios: Vec<Vec<[usize; 2]>>,
}

impl SolveReport {
    pub fn new(built: &BuiltModel, solution: &MilpSolution, lp_bound: f64) -> Self {
        let has_point = !solution.values.is_empty();
        let pairs = has_point.then(|| built.extract(&solution.values));
        SolveReport {
            model: built.kind.to_string(),
            status: solution.status.to_string(),
            objective: has_point.then_some(solution.objective),
            bound: solution.bound,
            lp_bound,
            node_count: solution.node_count,
            variables: built.stats.variables,
            constraints: built.stats.constraints,
            first_stage: pairs.as_ref().map(|p| pairs_to_file(&p.first)).unwrap_or_default(),
            scenarios: pairs.map(|p| p.scenarios.iter().map(pairs_to_file).collect()).unwrap_or_default(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialise")
    }
}

const LABELS: [&str; 3] = ["do", "ro", "so"];

fn kind_label(kind: ModelKind) -> String {
    kind.to_string().to_lowercase().replace('-', "_")
}

fn num(x: f64) -> String {
    format!("{x}")
}

fn sweep_header() -> Vec<String> {
    let mut h: Vec<String> =
        ["setting", "scenarios", "groups", "terminals", "seed", "status"].map(String::from).to_vec();
    for prefix in ["opt", "first"] {
        h.extend(LABELS.iter().map(|l| format!("{prefix}_{l}")));
    }
    for prefix in ["value", "ratio"] {
        for r in LABELS {
            h.extend(LABELS.iter().map(|c| format!("{prefix}_{r}_{c}")));
        }
    }
    h.push("vss".into());
    h.push("flow_gap".into());
    for kind in ModelKind::ALL {
        let k = kind_label(kind);
        h.extend(["vars", "cons", "nodes"].iter().map(|p| format!("{p}_{k}")));
    }
    h
}

/// Writes `sweep.csv`.
pub fn write_sweep_csv(result: &SweepResult, out: impl io::Write) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    let header = sweep_header();
    w.write_record(&header)?;
    for outcome in &result.outcomes {
        let (setting, seed) = match outcome {
            Ok(r) => (r.setting, r.seed),
            Err(f) => (f.setting, f.seed),
        };
        let mut row = vec![
            format!("{}-{}-{}", setting.num_scenarios, setting.num_groups, setting.terminals_per_group),
            setting.num_scenarios.to_string(),
            setting.num_groups.to_string(),
            setting.terminals_per_group.to_string(),
            seed.to_string(),
        ];
        match outcome {
            Err(f) => {
                row.push(f.reason.clone());
                row.resize(header.len(), String::new());
            }
            Ok(r) => {
                row.push("ok".into());
                row.extend(r.optimum.iter().map(|&x| num(x)));
                row.extend(r.first_stage_cost.iter().map(|&x| num(x)));
                row.extend(r.cross_value.iter().flatten().map(|&x| num(x)));
                row.extend(r.cross_ratio().iter().flatten().map(|&x| num(x)));
                row.push(num(r.vss()));
                row.push(num(r.flow_gap));
                for (kind, stats) in &r.sizes {
                    row.push(stats.variables.to_string());
                    row.push(stats.constraints.to_string());
                    row.push(
                        r.models.iter().find(|m| m.kind == *kind).map_or(String::new(), |m| m.node_count.to_string()),
                    );
                }
            }
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `matrix.csv`: both aggregations of the cross-objective matrix.
pub fn write_matrix_csv(result: &SweepResult, out: impl io::Write) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["aggregation", "model", "do", "ro", "so", "records"])?;
    if let Some(m) = &result.matrix {
        for (name, table) in [("mean_of_ratios", &m.mean_of_ratios), ("ratio_of_means", &m.ratio_of_means)] {
            for (r, row) in table.iter().enumerate() {
                let mut rec = vec![name.to_string(), LABELS[r].to_string()];
                rec.extend(row.iter().map(|&x| num(x)));
                rec.push(m.records.to_string());
                w.write_record(&rec)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes `ratios.csv`: RO over DO first-stage cost per completed record.
pub fn write_ratios_csv(result: &SweepResult, out: impl io::Write) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["setting", "seed", "first_do", "first_ro", "ratio"])?;
    for r in result.records() {
        let s = r.setting;
        w.write_record([
            format!("{}-{}-{}", s.num_scenarios, s.num_groups, s.terminals_per_group),
            r.seed.to_string(),
            num(r.first_stage_cost[0]),
            num(r.first_stage_cost[1]),
            num(r.ro_do_ratio()),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `timings.csv`: build and solve seconds per solved model.
pub fn write_timings_csv(result: &SweepResult, out: impl io::Write) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["setting", "seed", "model", "build_seconds", "solve_seconds"])?;
    for r in result.records() {
        let s = r.setting;
        for m in &r.models {
            w.write_record([
                format!("{}-{}-{}", s.num_scenarios, s.num_groups, s.terminals_per_group),
                r.seed.to_string(),
                m.kind.to_string(),
                num(m.build_time.as_secs_f64()),
                num(m.solve_time.as_secs_f64()),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes `curves.csv`: one column per candidate first stage, then the
/// stochastic optimum and the value of the stochastic solution.
pub fn write_curves_csv(table: &CurveTable, out: impl io::Write) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["rho2".to_string()];
    header.extend((1..=table.candidates.len()).map(|i| format!("route_{i}")));
    header.push("so_optimum".into());
    header.push("vss".into());
    w.write_record(&header)?;
    for row in &table.rows {
        let mut rec = vec![num(row.rho2)];
        rec.extend(row.expected.iter().map(|&x| num(x)));
        rec.push(num(row.so_optimum));
        rec.push(num(row.vss));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes the four sweep tables plus `timings.csv` into `dir`, returning the
/// paths written.
pub fn write_sweep_dir(result: &SweepResult, dir: &Path) -> Result<Vec<PathBuf>, csv::Error> {
    fs::create_dir_all(dir)?;
    type Writer = fn(&SweepResult, fs::File) -> Result<(), csv::Error>;
    let tables: [(&str, Writer); 4] = [
        ("sweep.csv", |r, f| write_sweep_csv(r, f)),
        ("matrix.csv", |r, f| write_matrix_csv(r, f)),
        ("ratios.csv", |r, f| write_ratios_csv(r, f)),
        ("timings.csv", |r, f| write_timings_csv(r, f)),
    ];
    let mut written = Vec::new();
    for (name, write) in tables {
        let path = dir.join(name);
        write(result, fs::File::create(&path)?)?;
        written.push(path);
    }
    Ok(written)
}
