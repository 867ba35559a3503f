//! `mwc`: validate, analyze, simulate and generate matrix-weighted signed
//! networks.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mwc_core::balance::BalanceError;
use mwc_core::conditions::ConditionError;
use mwc_core::dynamics::{classify_outcome, default_horizon, integrate, DynamicsError, Method};
use mwc_core::generator::{
    initial_state, synthesize, GeneratorError, InstanceRecipe, NullFrames, Violation,
};
use mwc_core::graph::{build_laplacian, lift_unsigned, validate_graph, GraphDocument};
use mwc_core::report::{analyze, render_human};
use mwc_core::spectral::{asymptotic_state, classify_solution_space, SpectralDecomposition};
use mwc_core::topology::TopologyError;
use mwc_core::{Error, MatrixWeightedGraph, Tolerances};
use rayon::prelude::*;
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(
    name = "mwc",
    version,
    about = "Bipartite-consensus analysis for matrix-weighted signed networks"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Serialize)]
struct Global {
    /// Seed for initial states and generated instances.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Directory for output files; reports go to stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Relative eigenvalue threshold for semidefinite weights.
    #[arg(long, global = true)]
    tol_def: Option<f64>,
    /// Relative singular-value threshold for ranks and null spaces.
    #[arg(long, global = true)]
    tol_rank: Option<f64>,
    /// Simulation horizon; defaults to 30 over the smallest positive eigenvalue.
    #[arg(long, global = true)]
    horizon: Option<f64>,
    #[arg(long, global = true)]
    path_cap: Option<usize>,
    #[arg(long, global = true)]
    partition_cap: Option<u64>,
    /// Worker threads; output order does not depend on it.
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
enum Format {
    Json,
    Human,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
enum MethodArg {
    Exact,
    Rk4,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a graph document and summarize it.
    Validate(InputArgs),
    /// Run the spectral classification and the condition checks.
    Analyze(InputArgs),
    /// Integrate the dynamics from a random initial state.
    Simulate(SimulateArgs),
    /// Synthesize graphs together with their expected behavior.
    Gen(GenArgs),
}

#[derive(Args, Debug, Clone, Serialize)]
struct InputArgs {
    /// Graph document (JSON).
    input: PathBuf,
    /// Read the weights as unsigned positive semidefinite matrices.
    #[arg(long)]
    unsigned: bool,
}

#[derive(Args, Debug, Clone, Serialize)]
struct SimulateArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, value_enum, default_value_t = MethodArg::Exact)]
    method: MethodArg,
    /// RK4 step; defaults to half the inverse largest eigenvalue.
    #[arg(long)]
    step: Option<f64>,
    /// Number of recorded intervals.
    #[arg(long, default_value_t = 100)]
    samples: usize,
}

#[derive(Args, Debug, Clone, Serialize)]
struct GenArgs {
    #[arg(long, default_value_t = 2)]
    d: usize,
    #[arg(long, default_value_t = 2)]
    continents: usize,
    #[arg(long, default_value_t = 2)]
    continent_size: usize,
    /// Consistent paths per pair of consecutive continents.
    #[arg(long, default_value_t = 2)]
    bridges: usize,
    #[arg(long, default_value_t = 1)]
    max_path_len: usize,
    #[arg(long, value_enum, default_value_t = NullsArg::Orthogonal)]
    nulls: NullsArg,
    #[arg(long)]
    bipartite: bool,
    #[arg(long)]
    nbs_bridges: bool,
    #[arg(long)]
    internal_nbs: bool,
    #[arg(long, value_enum, default_value_t = ViolateArg::None)]
    violate: ViolateArg,
    /// Instances to generate, seeded consecutively from `--seed`.
    #[arg(long, default_value_t = 1)]
    count: u64,
}

#[derive(ValueEnum, Debug, Clone, Copy, Serialize)]
#[serde(rename_all = "snake_case")]
enum NullsArg {
    Orthogonal,
    Random,
    Axis,
}

#[derive(ValueEnum, Debug, Clone, Copy, Serialize)]
#[serde(rename_all = "snake_case")]
enum ViolateArg {
    None,
    Condition2,
    Condition3,
    Condition4,
    Condition5,
    IndefiniteCycle,
}

/// Effective configuration embedded in every output.
#[derive(Debug, Serialize)]
struct RunConfig<'a> {
    command: &'static str,
    global: &'a Global,
    tolerances: Tolerances,
}

#[derive(Serialize)]
struct WithConfig<'a, T: Serialize> {
    run: &'a RunConfig<'a>,
    #[serde(flatten)]
    body: &'a T,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }

    fn other(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Graph(_) => 2,
            Error::Topology(TopologyError::PathBudgetExceeded { .. })
            | Error::Condition(ConditionError::Topology(TopologyError::PathBudgetExceeded {
                ..
            }))
            | Error::Balance(BalanceError::SearchBudgetExceeded { .. })
            | Error::Condition(ConditionError::Balance(BalanceError::SearchBudgetExceeded {
                ..
            })) => 3,
            Error::Dynamics(DynamicsError::NotSettled { .. }) => 4,
            Error::Dynamics(
                DynamicsError::InvalidHorizon(_) | DynamicsError::StepTooLarge { .. },
            ) => 2,
            Error::Generator(GeneratorError::InfeasibleRecipe(_)) => 2,
            _ => 1,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

fn lift<E: Into<Error>>(e: E) -> Failure {
    Failure::from(e.into())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn tolerances(g: &Global) -> Tolerances {
    let mut t = Tolerances::default();
    if let Some(v) = g.tol_def {
        t.definiteness = v;
    }
    if let Some(v) = g.tol_rank {
        t.rank = v;
    }
    if let Some(v) = g.path_cap {
        t.path_cap = v;
    }
    if let Some(v) = g.partition_cap {
        t.partition_cap = v;
    }
    t
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let g = &cli.global;
    if let Some(j) = g.jobs {
        if j == 0 {
            return Err(Failure::input("--jobs must be positive"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build_global()
            .map_err(|e| Failure::other(e.to_string()))?;
    }
    if let Some(h) = g.horizon {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Failure::input(format!(
                "--horizon must be positive, got {h}"
            )));
        }
    }
    let tol = tolerances(g);
    match &cli.command {
        Command::Validate(a) => cmd_validate(g, a, &tol),
        Command::Analyze(a) => cmd_analyze(g, a, &tol),
        Command::Simulate(a) => cmd_simulate(g, a, &tol),
        Command::Gen(a) => cmd_gen(g, a, &tol),
    }
}

fn load(args: &InputArgs, tol: &Tolerances) -> Result<MatrixWeightedGraph, Failure> {
    let text = fs::read_to_string(&args.input)
        .map_err(|e| Failure::input(format!("{}: {e}", args.input.display())))?;
    let doc = GraphDocument::from_json(&text).map_err(lift)?;
    let g = if args.unsigned {
        lift_unsigned(&doc, tol)
    } else {
        validate_graph(&doc, tol)
    };
    g.map_err(lift)
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map_or_else(|| "graph".into(), |s| s.to_string_lossy().into_owned())
}

fn to_json<T: Serialize>(value: &T) -> Result<String, Failure> {
    serde_json::to_string_pretty(value)
        .map(|s| s + "\n")
        .map_err(|e| Failure::other(e.to_string()))
}

fn write_file(dir: &Path, name: &str, contents: &[u8]) -> Result<PathBuf, Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::other(format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| Failure::other(format!("{}: {e}", path.display())))?;
    Ok(path)
}

/// Writes to `--out` under `name`, or to stdout.
fn emit(g: &Global, name: &str, text: &str) -> Result<(), Failure> {
    match &g.out {
        Some(dir) => {
            write_file(dir, name, text.as_bytes())?;
        }
        None => print!("{text}"),
    }
    Ok(())
}

#[derive(Serialize)]
struct ValidateSummary {
    nodes: usize,
    edges: usize,
    d: usize,
    connected: bool,
}

fn cmd_validate(g: &Global, a: &InputArgs, tol: &Tolerances) -> Result<(), Failure> {
    let graph = load(a, tol)?;
    let summary = ValidateSummary {
        nodes: graph.node_count(),
        edges: graph.edges().len(),
        d: graph.dim(),
        connected: graph.is_connected(),
    };
    let text = match g.format {
        Format::Json => {
            let run = RunConfig {
                command: "validate",
                global: g,
                tolerances: *tol,
            };
            to_json(&WithConfig {
                run: &run,
                body: &summary,
            })?
        }
        Format::Human => format!(
            "valid: {} nodes, {} edges, d = {}, {}\n",
            summary.nodes,
            summary.edges,
            summary.d,
            if summary.connected {
                "connected"
            } else {
                "disconnected"
            }
        ),
    };
    emit(
        g,
        &format!("{}.validate.{}", stem(&a.input), ext(g.format)),
        &text,
    )
}

fn ext(f: Format) -> &'static str {
    match f {
        Format::Json => "json",
        Format::Human => "txt",
    }
}

fn cmd_analyze(g: &Global, a: &InputArgs, tol: &Tolerances) -> Result<(), Failure> {
    let graph = load(a, tol)?;
    let report = analyze(&graph, tol)?;
    let text = match g.format {
        Format::Json => {
            let run = RunConfig {
                command: "analyze",
                global: g,
                tolerances: *tol,
            };
            to_json(&WithConfig {
                run: &run,
                body: &report,
            })?
        }
        Format::Human => render_human(&report),
    };
    emit(
        g,
        &format!("{}.report.{}", stem(&a.input), ext(g.format)),
        &text,
    )
}

#[derive(Serialize)]
struct SimulationSummary<'a> {
    method: Method,
    horizon: f64,
    outcome: &'a mwc_core::dynamics::Outcome,
    spectral_class: mwc_core::spectral::SolutionClass,
    /// `‖x(T) - P x0‖∞` against the null-space projection.
    agreement_residual: f64,
    initial_state: Vec<f64>,
    terminal_state: Vec<f64>,
}

fn cmd_simulate(g: &Global, a: &SimulateArgs, tol: &Tolerances) -> Result<(), Failure> {
    let graph = load(&a.input, tol)?;
    let l = build_laplacian(&graph);
    let spec = SpectralDecomposition::of(&l);
    let horizon = g.horizon.unwrap_or_else(|| default_horizon(&spec, tol));
    let method = match a.method {
        MethodArg::Exact => Method::Exact,
        MethodArg::Rk4 => Method::Rk4 {
            step: a
                .step
                .unwrap_or(0.5 / spec.lambda_max().max(f64::MIN_POSITIVE)),
        },
    };
    let x0 = initial_state(l.size(), g.seed);
    let traj = integrate(&l, &x0, horizon, a.samples, method).map_err(lift)?;
    let mut csv = Vec::new();
    traj.write_csv(graph.node_ids(), graph.dim(), &mut csv)
        .map_err(|e| Failure::other(e.to_string()))?;
    let outcome = classify_outcome(&l, &traj, tol).map_err(lift)?;
    let basis = spec.null_basis(tol);
    let target = asymptotic_state(&l, &x0, tol);
    let summary = SimulationSummary {
        method,
        horizon,
        outcome: &outcome,
        spectral_class: classify_solution_space(&basis, graph.node_count(), graph.dim()),
        agreement_residual: (traj.terminal() - target).amax(),
        initial_state: x0.iter().copied().collect(),
        terminal_state: traj.terminal().iter().copied().collect(),
    };
    let run = RunConfig {
        command: "simulate",
        global: g,
        tolerances: *tol,
    };
    let json = to_json(&WithConfig {
        run: &run,
        body: &summary,
    })?;
    let base = stem(&a.input.input);
    if let Some(dir) = &g.out {
        write_file(dir, &format!("{base}.trajectory.csv"), &csv)?;
        write_file(dir, &format!("{base}.outcome.json"), json.as_bytes())?;
    }
    match g.format {
        Format::Json if g.out.is_none() => print!("{json}"),
        Format::Json => {}
        Format::Human => println!(
            "outcome {} (spectral class {}), agreement residual {:.3e}, horizon {}",
            outcome.label.label(),
            summary.spectral_class.label(),
            summary.agreement_residual,
            horizon
        ),
    }
    Ok(())
}

fn recipe_for(a: &GenArgs, seed: u64) -> InstanceRecipe {
    InstanceRecipe {
        seed,
        d: a.d,
        continents: a.continents,
        continent_size: a.continent_size,
        bridges: a.bridges,
        max_path_len: a.max_path_len,
        nulls: match a.nulls {
            NullsArg::Orthogonal => NullFrames::Orthogonal,
            NullsArg::Random => NullFrames::Random,
            NullsArg::Axis => NullFrames::Axis,
        },
        bipartite: a.bipartite,
        nbs_bridges: a.nbs_bridges,
        internal_nbs: a.internal_nbs,
        violate: match a.violate {
            ViolateArg::None => Violation::None,
            ViolateArg::Condition2 => Violation::Condition2,
            ViolateArg::Condition3 => Violation::Condition3,
            ViolateArg::Condition4 => Violation::Condition4,
            ViolateArg::Condition5 => Violation::Condition5,
            ViolateArg::IndefiniteCycle => Violation::IndefiniteCycle,
        },
    }
}

fn cmd_gen(g: &Global, a: &GenArgs, tol: &Tolerances) -> Result<(), Failure> {
    if a.count == 0 {
        return Err(Failure::input("--count must be positive"));
    }
    let dir = g.out.clone().unwrap_or_else(|| PathBuf::from("."));
    let run = RunConfig {
        command: "gen",
        global: g,
        tolerances: *tol,
    };
    let instances: Vec<_> = (0..a.count)
        .into_par_iter()
        .map(|k| synthesize(&recipe_for(a, g.seed.wrapping_add(k))))
        .collect();
    for inst in instances {
        let inst = inst.map_err(lift)?;
        let seed = inst.expectation.recipe.seed;
        let graph_name = format!("graph_{seed}.json");
        write_file(
            &dir,
            &graph_name,
            inst.graph.to_document().to_json().as_bytes(),
        )?;
        let exp = to_json(&WithConfig {
            run: &run,
            body: &inst.expectation,
        })?;
        write_file(
            &dir,
            &format!("graph_{seed}.expectation.json"),
            exp.as_bytes(),
        )?;
        if g.format == Format::Human {
            println!("{graph_name}: expected {}", inst.expectation.expected_class);
        }
    }
    Ok(())
}
