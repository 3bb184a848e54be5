use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Parser, Subcommand, ValueEnum};
use ssfp::experiments::{cost_curves, model_config, rho_grid, run_sweep, Budget, SweepOptions};
use ssfp::io::{load_instance, load_ship, load_solution, save_instance, IoError, ShipData};
use ssfp::report::{write_curves_csv, write_sweep_dir, SolveReport};
use ssfp::solver::{solve_lp, solve_milp};
use ssfp_core::graph::{validate_feasible, TwoStageInstance};
use ssfp_core::instances::{fig2_instance, four_cycle_two_stage, random_artificial, small_grid, Setting, SweepConfig};
use ssfp_core::lp_format::export_lp;
use ssfp_core::milp::{relax, SolveStatus};
use ssfp_core::models::{build, Flow, ModelKind, Optimization};
use ssfp_core::InstanceError;

#[derive(Parser)]
#[command(name = "ssfp", version, about = "Two-stage stochastic Steiner forest pipe routing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one model and print the installed pipes.
    Solve {
        /// Instance file, `builtin:fig2` or `builtin:four-cycle`.
        #[arg(long)]
        instance: String,
        #[arg(long, value_enum)]
        model: ModelArg,
        #[arg(long, value_enum)]
        flow: FlowArg,
        /// Probability of the second scenario of a two-scenario instance.
        #[arg(long)]
        rho2: Option<f64>,
        /// Write the JSON report here.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 10_000_000)]
        node_limit: u64,
    },
    /// Run the artificial parameter study and write its CSV tables.
    Sweep {
        /// `all` or a comma-separated list such as `2-1-3,3-2-4`
        /// (scenarios-groups-terminals).
        #[arg(long, default_value = "all")]
        settings: String,
        #[arg(long, default_value_t = 10)]
        seeds: u64,
        #[arg(long)]
        out_dir: PathBuf,
        /// Flow formulations to solve; `ud` solves all six models.
        #[arg(long, default_value = "d")]
        flows: String,
        /// Stop starting records after this many seconds.
        #[arg(long)]
        budget_secs: Option<u64>,
        /// Give up on a single record after this many seconds.
        #[arg(long)]
        record_secs: Option<u64>,
        #[arg(long, default_value_t = 10_000_000)]
        node_limit: u64,
    },
    /// Expected-cost lines of the candidate first stages over a grid of ρ₂.
    Curves {
        #[arg(long, default_value = "builtin:fig2")]
        instance: String,
        /// `start:end:step`.
        #[arg(long, default_value = "0:1:0.01")]
        grid: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check a solution file against an instance.
    Validate {
        #[arg(long)]
        instance: String,
        #[arg(long)]
        solution: PathBuf,
    },
    /// Write a model in CPLEX LP format.
    ExportLp {
        #[arg(long)]
        instance: String,
        #[arg(long, value_enum)]
        model: ModelArg,
        #[arg(long, value_enum)]
        flow: FlowArg,
        #[arg(long)]
        rho2: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate an instance file.
    Gen {
        #[arg(long, value_enum)]
        config: GenConfig,
        /// Setting of a sweep instance, scenarios-groups-terminals.
        #[arg(long, default_value = "2-1-3")]
        setting: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Room graph for the realistic instance.
        #[arg(long)]
        graph: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Do,
    Ro,
    So,
}

#[derive(Clone, Copy, ValueEnum)]
enum FlowArg {
    U,
    D,
}

#[derive(Clone, Copy, ValueEnum)]
enum GenConfig {
    /// A 5×5 instance of the artificial study.
    SweepSetting,
    /// A 3×3 instance small enough for exhaustive search.
    SmallGrid,
    /// The ship terminal data laid over `--graph`.
    Realistic,
}

enum Failure {
    Usage(String),
    Infeasible(String),
    NodeLimit(String),
    Other(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Other(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Infeasible(_) => 3,
            Failure::NodeLimit(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Infeasible(m) | Failure::NodeLimit(m) | Failure::Other(m) => m,
        }
    }
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        match e {
            IoError::Instance { .. } => Failure::Infeasible(e.to_string()),
            _ => Failure::Other(e.to_string()),
        }
    }
}

fn other(e: impl std::fmt::Display) -> Failure {
    Failure::Other(e.to_string())
}

fn kind(model: ModelArg, flow: FlowArg) -> ModelKind {
    let optimization = match model {
        ModelArg::Do => Optimization::Deterministic,
        ModelArg::Ro => Optimization::Robust,
        ModelArg::So => Optimization::Stochastic,
    };
    let flow = match flow {
        FlowArg::U => Flow::Undirected,
        FlowArg::D => Flow::Directed,
    };
    ModelKind::new(optimization, flow)
}

fn instance_error(e: InstanceError) -> Failure {
    Failure::Infeasible(e.to_string())
}

fn load(spec: &str, rho2: Option<f64>) -> Result<TwoStageInstance, Failure> {
    let two = match spec {
        "builtin:fig2" => fig2_instance(0.5).map_err(other)?,
        "builtin:four-cycle" => four_cycle_two_stage().map_err(other)?,
        s if s.starts_with("builtin:") => return Err(Failure::Usage(format!("unknown built-in instance {s}"))),
        path => load_instance(path)?,
    };
    match rho2 {
        None => Ok(two),
        Some(r) if two.num_scenarios() == 2 && (0.0..=1.0).contains(&r) => two.with_rho2(r).map_err(instance_error),
        Some(r) => Err(Failure::Usage(format!("--rho2 {r} needs a two-scenario instance and a value in [0, 1]"))),
    }
}

fn parse_setting(text: &str) -> Result<Setting, Failure> {
    let parts: Vec<usize> = text
        .split('-')
        .map(|p| p.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|_| Failure::Usage(format!("setting {text:?} is not scenarios-groups-terminals")))?;
    match parts[..] {
        [num_scenarios, num_groups, terminals_per_group] => {
            Ok(Setting { num_scenarios, num_groups, terminals_per_group })
        }
        _ => Err(Failure::Usage(format!("setting {text:?} is not scenarios-groups-terminals"))),
    }
}

fn parse_grid(text: &str) -> Result<Vec<f64>, Failure> {
    let bad = || Failure::Usage(format!("grid {text:?} is not start:end:step"));
    let parts: Vec<f64> = text.split(':').map(|p| p.parse::<f64>()).collect::<Result<_, _>>().map_err(|_| bad())?;
    match parts[..] {
        [start, end, step] if step > 0.0 && start <= end && (0.0..=1.0).contains(&start) && end <= 1.0 => {
            Ok(rho_grid(start, end, step))
        }
        _ => Err(bad()),
    }
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::Other(format!("{}: {e}", path.display())))
}

fn solve(
    instance: &str,
    model: ModelArg,
    flow: FlowArg,
    rho2: Option<f64>,
    out: Option<&Path>,
    node_limit: u64,
) -> Result<(), Failure> {
    let two = load(instance, rho2)?;
    let built = build(kind(model, flow), &two).map_err(other)?;
    let lp = solve_lp(&relax(&built.milp)).map_err(other)?;
    let config = model_config(&built, Budget { node_limit, deadline: None });
    let solution = solve_milp(&built.milp, &config).map_err(other)?;
    let report = SolveReport::new(&built, &solution, lp.objective);
    println!("model      {}", report.model);
    println!("status     {}", report.status);
    match report.objective {
        Some(obj) => println!("objective  {obj}"),
        None => println!("objective  none"),
    }
    println!("bound      {}", report.bound);
    println!("lp bound   {}", report.lp_bound);
    println!("nodes      {}", report.node_count);
    println!("size       {} variables, {} constraints", report.variables, report.constraints);
    println!("first      {:?}", report.first_stage);
    for (s, pairs) in report.scenarios.iter().enumerate() {
        println!("scenario {} {:?}", s + 1, pairs);
    }
    if let Some(path) = out {
        write(path, &report.to_json())?;
    }
    match solution.status {
        SolveStatus::Optimal => Ok(()),
        SolveStatus::Infeasible => Err(Failure::Infeasible("model is infeasible".into())),
        SolveStatus::NodeLimit => Err(Failure::NodeLimit(format!("node limit reached, bound {}", solution.bound))),
        s => Err(Failure::Other(format!("solver stopped with status {s}"))),
    }
}

struct SweepArgs<'a> {
    settings: &'a str,
    seeds: u64,
    out_dir: &'a Path,
    flows: &'a str,
    budget_secs: Option<u64>,
    record_secs: Option<u64>,
    node_limit: u64,
}

fn sweep(args: SweepArgs<'_>) -> Result<(), Failure> {
    let SweepArgs { settings, seeds, out_dir, flows, budget_secs, record_secs, node_limit } = args;
    let mut config = SweepConfig::full(seeds);
    if settings != "all" {
        let chosen: Vec<Setting> = settings.split(',').map(parse_setting).collect::<Result<_, _>>()?;
        config.scenario_counts = Vec::new();
        config.group_counts = Vec::new();
        config.terminal_counts = Vec::new();
        let keep = |v: &mut Vec<usize>, x| {
            if !v.contains(&x) {
                v.push(x);
            }
        };
        for s in &chosen {
            keep(&mut config.scenario_counts, s.num_scenarios);
            keep(&mut config.group_counts, s.num_groups);
            keep(&mut config.terminal_counts, s.terminals_per_group);
        }
        if config.census() != chosen.len() * seeds as usize {
            return Err(Failure::Usage("listed settings must form a full scenarios × groups × terminals grid".into()));
        }
    }
    let flows = match flows {
        "d" => vec![Flow::Directed],
        "u" => vec![Flow::Undirected],
        "ud" | "du" => vec![Flow::Directed, Flow::Undirected],
        f => return Err(Failure::Usage(format!("--flows {f:?} is not d, u or ud"))),
    };
    let options = SweepOptions {
        flows,
        budget: Budget { node_limit, deadline: budget_secs.map(|s| Instant::now() + Duration::from_secs(s)) },
        record_limit: record_secs.map(Duration::from_secs),
        ..SweepOptions::default()
    };
    let result = run_sweep(&config, &options);
    for path in write_sweep_dir(&result, out_dir).map_err(other)? {
        println!("wrote {}", path.display());
    }
    let curves =
        cost_curves(&fig2_instance(0.5).map_err(other)?, &rho_grid(0.0, 1.0, 0.01), options.budget).map_err(other)?;
    let curves_path = out_dir.join("curves.csv");
    write_curves_csv(&curves, fs::File::create(&curves_path).map_err(other)?).map_err(other)?;
    println!("wrote {}", curves_path.display());
    if let Some(m) = &result.matrix {
        println!("{} records; mean of per-instance ratios (rows: model, columns: DO RO SO objective)", m.records);
        for (label, row) in ["DO", "RO", "SO"].iter().zip(&m.mean_of_ratios) {
            println!("  {label}  {:.3}  {:.3}  {:.3}", row[0], row[1], row[2]);
        }
    }
    let failures: Vec<_> = result.failures().collect();
    for f in &failures {
        eprintln!("{f}");
    }
    match failures.first() {
        None => Ok(()),
        Some(_) => Err(Failure::NodeLimit(format!("{} of {} records failed", failures.len(), result.outcomes.len()))),
    }
}

fn curves(instance: &str, grid: &str, out: &Path) -> Result<(), Failure> {
    let two = load(instance, None)?;
    let grid = parse_grid(grid)?;
    let table = cost_curves(&two, &grid, Budget::default()).map_err(other)?;
    write_curves_csv(&table, fs::File::create(out).map_err(other)?).map_err(other)?;
    for (i, c) in table.candidates.iter().enumerate() {
        println!("route_{}: {} + (1 - rho2)*{} + rho2*{}", i + 1, c.first_stage_cost, c.recourse[0], c.recourse[1]);
    }
    let cuts: Vec<String> = table.intersections.iter().map(|x| format!("{x}")).collect();
    println!("intersections: {}", cuts.join(" "));
    Ok(())
}

fn validate(instance: &str, solution: &Path) -> Result<(), Failure> {
    let two = load(instance, None)?;
    let stages = load_solution(solution)?.resolve(&two)?;
    let mut problems = Vec::new();
    let first = stages.first_stage.union(two.existing());
    let check = validate_feasible(two.first_stage(), &first).map_err(instance_error)?;
    if !check.is_feasible() {
        problems.push(format!("first stage leaves groups {:?} disconnected", check.disconnected_groups));
    }
    if !stages.scenarios.is_empty() && stages.scenarios.len() != two.num_scenarios() {
        return Err(Failure::Usage(format!(
            "solution has {} scenarios, instance has {}",
            stages.scenarios.len(),
            two.num_scenarios()
        )));
    }
    for (s, later) in stages.scenarios.iter().enumerate() {
        let check = validate_feasible(two.scenario(s), &later.union(&first)).map_err(instance_error)?;
        if !check.is_feasible() {
            problems.push(format!("scenario {} leaves groups {:?} disconnected", s + 1, check.disconnected_groups));
        }
    }
    if problems.is_empty() {
        println!("feasible");
        Ok(())
    } else {
        Err(Failure::Infeasible(problems.join("; ")))
    }
}

fn export(instance: &str, model: ModelArg, flow: FlowArg, rho2: Option<f64>, out: &Path) -> Result<(), Failure> {
    let two = load(instance, rho2)?;
    let built = build(kind(model, flow), &two).map_err(other)?;
    write(out, &export_lp(&built.milp))
}

fn generate(config: GenConfig, setting: &str, seed: u64, graph: Option<&Path>, out: &Path) -> Result<(), Failure> {
    let two = match config {
        GenConfig::SweepSetting => random_artificial(parse_setting(setting)?, seed).map_err(other)?,
        GenConfig::SmallGrid => small_grid(seed).map_err(other)?,
        GenConfig::Realistic => {
            let graph = graph.ok_or_else(|| Failure::Usage("--config realistic needs --graph".into()))?;
            load_ship(graph, &ShipData::bundled())?
        }
    };
    save_instance(&two, out)?;
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Solve { instance, model, flow, rho2, out, node_limit } => {
            solve(&instance, model, flow, rho2, out.as_deref(), node_limit)
        }
        Command::Sweep { settings, seeds, out_dir, flows, budget_secs, record_secs, node_limit } => sweep(SweepArgs {
            settings: &settings,
            seeds,
            out_dir: &out_dir,
            flows: &flows,
            budget_secs,
            record_secs,
            node_limit,
        }),
        Command::Curves { instance, grid, out } => curves(&instance, &grid, &out),
        Command::Validate { instance, solution } => validate(&instance, &solution),
        Command::ExportLp { instance, model, flow, rho2, out } => export(&instance, model, flow, rho2, &out),
        Command::Gen { config, setting, seed, graph, out } => generate(config, &setting, seed, graph.as_deref(), &out),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
