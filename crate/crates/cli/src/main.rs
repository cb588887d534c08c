use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use malinbai::algorithms::{run_gen, run_ma_od, run_star, Algorithm};
use malinbai::bandit::{read_arms_csv, RngStream};
use malinbai::design::{g_optimal_design, DEFAULT_EPSILON, DEFAULT_MAX_ITER};
use malinbai::experiments::{
    lower_bound_exponent, monte_carlo, theorem1_bound, theorem2_bound, write_sweep_outputs,
    InstanceSpec, SweepConfig,
};
use malinbai::linalg::rank_basis;
use malinbai::topology::{build_partition, greedy_dominating_set, AgentGraph, Partition};
use malinbai::{Error, Scalar};

/// Collaborative fixed-budget best-arm identification for linear bandits.
#[derive(Parser, Debug)]
#[command(name = "malinbai", version)]
struct Cli {
    /// Worker threads for Monte-Carlo trials (results do not depend on it).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one identification experiment and print its outcome as JSON.
    Run(RunArgs),
    /// Monte-Carlo sweep described by a JSON config.
    Sweep(SweepArgs),
    /// Solve the G-optimal design for an arm set.
    Design(DesignArgs),
    /// Greedy dominating set and the induced partition of a graph.
    Domset(DomsetArgs),
    /// Evaluate a theoretical error bound.
    Bound(BoundArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Precision {
    F32,
    F64,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[arg(long, value_parser = parse_algo)]
    algo: Algorithm,
    /// Instance JSON file or generator spec (`std:d=10,delta=0.3`, `sphere:d=5,k=100,seed=1`).
    #[arg(long)]
    instance: String,
    /// Number of agents.
    #[arg(long = "M")]
    m: usize,
    /// Per-agent budget.
    #[arg(long = "T")]
    t: usize,
    #[arg(long, env = "MALINBAI_SEED", default_value_t = 0)]
    seed: u64,
    /// Edge-list file (gen only; star on M agents if absent).
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Partition JSON (gen only; greedy if absent).
    #[arg(long)]
    partition: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Precision::F64)]
    precision: Precision,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out_dir: PathBuf,
    /// Overrides the config's master seed.
    #[arg(long, env = "MALINBAI_SEED")]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = Precision::F64)]
    precision: Precision,
}

#[derive(Args, Debug)]
struct DesignArgs {
    /// Headerless CSV, one arm per row.
    #[arg(long)]
    arms: PathBuf,
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    epsilon: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
    max_iter: usize,
}

#[derive(Args, Debug)]
struct DomsetArgs {
    #[arg(long)]
    graph: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Theorem {
    #[value(name = "1")]
    One,
    #[value(name = "2")]
    Two,
    Lower,
}

#[derive(Args, Debug)]
struct BoundArgs {
    #[arg(long, value_enum)]
    thm: Theorem,
    #[arg(long = "T")]
    t: f64,
    #[arg(long = "M", required_if_eq("thm", "1"))]
    m: Option<f64>,
    #[arg(long, required_if_eq_any([("thm", "1"), ("thm", "2")]))]
    d: Option<f64>,
    #[arg(long = "K", required_if_eq_any([("thm", "1"), ("thm", "2")]))]
    k: Option<f64>,
    #[arg(long, required_if_eq_any([("thm", "1"), ("thm", "2")]))]
    delta: Option<f64>,
    /// Instance for the lower-bound exponent.
    #[arg(long, required_if_eq("thm", "lower"))]
    instance: Option<String>,
}

fn parse_algo(s: &str) -> Result<Algorithm, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Failure carrying the process exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if e.is_input_error() { 2 } else { 3 };
        Failure {
            code,
            message: format!("{}: {e}", e.name()),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

type CmdResult = Result<(), Failure>;

fn emit(text: &str, out: Option<&Path>) -> CmdResult {
    match out {
        Some(path) => {
            fs::write(path, format!("{text}\n")).map_err(|e| Failure::from(Error::from(e)))
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            writeln!(stdout, "{text}").map_err(|e| Failure::from(Error::from(e)))
        }
    }
}

fn to_json<S: Serialize>(value: &S) -> String {
    serde_json::to_string_pretty(value).expect("value serializes")
}

fn load_topology(args: &RunArgs) -> Result<(AgentGraph, Partition), Failure> {
    let graph = match &args.graph {
        Some(path) => AgentGraph::read(path)?,
        None => AgentGraph::star(args.m)?,
    };
    if graph.num_vertices() != args.m {
        return Err(usage(format!(
            "--M {} does not match the graph's {} vertices",
            args.m,
            graph.num_vertices()
        )));
    }
    let partition = match &args.partition {
        Some(path) => Partition::read(path)?,
        None => build_partition(&graph, &greedy_dominating_set(&graph))?,
    };
    Ok((graph, partition))
}

fn cmd_run<T: Scalar>(args: &RunArgs) -> CmdResult {
    if args.algo != Algorithm::Gen && (args.graph.is_some() || args.partition.is_some()) {
        return Err(usage("--graph and --partition only apply to --algo gen"));
    }
    let inst = InstanceSpec::parse(&args.instance)?.build::<T>()?;
    let trial = RngStream::new(args.seed).child(0);
    let outcome = match args.algo {
        Algorithm::Star => run_star(&inst, args.m, args.t, &trial)?,
        Algorithm::MaOd => run_ma_od(&inst, args.m, args.t, &trial)?,
        Algorithm::Gen => {
            let (graph, partition) = load_topology(args)?;
            run_gen(&inst, &graph, &partition, args.t, &trial)?
        }
    };
    eprintln!(
        "chosen arm {} (best {}), correct: {}, data messages: {}",
        outcome.chosen_arm,
        outcome.best_arm,
        outcome.correct,
        outcome.ledger.data_messages()
    );
    emit(&outcome.to_json(), args.out.as_deref())
}

fn cmd_sweep<T: Scalar>(args: &SweepArgs) -> CmdResult {
    let mut cfg = SweepConfig::read(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.master_seed = seed;
    }
    cfg.validate()?;
    let estimates = monte_carlo::<T>(&cfg)?;
    write_sweep_outputs(&args.out_dir, &cfg, &estimates)?;
    for e in &estimates {
        eprintln!("param {}: p_hat {} ± {}", e.param, e.p_hat, e.stderr);
    }
    Ok(())
}

fn cmd_design(args: &DesignArgs) -> CmdResult {
    let arms = read_arms_csv::<f64>(&args.arms)?;
    let basis = rank_basis(&arms, f64::rank_tol())?;
    let projected = arms
        .iter()
        .map(|a| basis.project(a))
        .collect::<Result<Vec<_>, _>>()?;
    let design = g_optimal_design(&projected, args.epsilon, args.max_iter)?;
    emit(&to_json(&design), None)
}

fn cmd_domset(args: &DomsetArgs) -> CmdResult {
    let graph = AgentGraph::read(&args.graph)?;
    let partition = build_partition(&graph, &greedy_dominating_set(&graph))?;
    emit(&to_json(&partition), None)
}

#[derive(Serialize)]
struct BoundReport {
    theorem: &'static str,
    value: f64,
}

fn cmd_bound(args: &BoundArgs) -> CmdResult {
    let req = |v: Option<f64>, name: &str| v.ok_or_else(|| usage(format!("--{name} is required")));
    let report = match args.thm {
        Theorem::One => BoundReport {
            theorem: "1",
            value: theorem1_bound(
                args.t,
                req(args.m, "M")?,
                req(args.d, "d")?,
                req(args.k, "K")?,
                req(args.delta, "delta")?,
            ),
        },
        Theorem::Two => BoundReport {
            theorem: "2",
            value: theorem2_bound(
                args.t,
                req(args.d, "d")?,
                req(args.k, "K")?,
                req(args.delta, "delta")?,
            ),
        },
        Theorem::Lower => {
            let spec = args
                .instance
                .as_deref()
                .ok_or_else(|| usage("--instance is required"))?;
            let inst = InstanceSpec::parse(spec)?.build::<f64>()?;
            BoundReport {
                theorem: "lower",
                value: lower_bound_exponent(&inst, args.t)?,
            }
        }
    };
    emit(&to_json(&report), None)
}

fn dispatch(command: &Command) -> CmdResult {
    match command {
        Command::Run(a) => match a.precision {
            Precision::F64 => cmd_run::<f64>(a),
            Precision::F32 => cmd_run::<f32>(a),
        },
        Command::Sweep(a) => match a.precision {
            Precision::F64 => cmd_sweep::<f64>(a),
            Precision::F32 => cmd_sweep::<f32>(a),
        },
        Command::Design(a) => cmd_design(a),
        Command::Domset(a) => cmd_domset(a),
        Command::Bound(a) => cmd_bound(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| dispatch(&cli.command)),
            Err(e) => Err(usage(format!("cannot start {n} threads: {e}"))),
        },
        None => dispatch(&cli.command),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
