use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use sstroute::dp::{extract_trajectory, least_cost_path, trajectory_csv};
use sstroute::io::euclidean::{
    convert_euclidean, random_euclidean, EuclideanGenConfig, EuclideanInstance, LoadMode,
};
use sstroute::io::gen::{
    distant_origins_instance, large_instance, random_instance, scenario_instance, shared_ride_instance,
    LargeConfig, RandomConfig, Scenario,
};
use sstroute::io::report::{
    history_csv, write_json, HistoryDocument, ReductionDocument, RunManifest, SolutionDocument,
    VehicleSchedule,
};
use sstroute::io::{load_instance, save_instance, Instance};
use sstroute::lr::{GeneralizedCost, LagrangianSolver, LrConfig};
use sstroute::reduce::build_reduction_report;
use sstroute::setpart::solve_instance;
use sstroute::sst::VehicleSstNetwork;

/// Pickup-and-delivery routing on time-dependent networks.
#[derive(Parser, Debug)]
#[command(name = "sstroute", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
enum Command {
    /// Solve an instance with the Lagrangian loop.
    Solve(SolveArgs),
    /// Route a single vehicle with fixed pickup prices.
    Dp(DpArgs),
    /// List passenger pairs and nodes excluded by the pruning rules.
    Reduce(ReduceArgs),
    /// Solve a small instance exactly by set partitioning.
    Oracle(OracleArgs),
    /// Convert a Euclidean request file into an instance.
    Convert(ConvertArgs),
    /// Write a generated instance.
    Gen(GenArgs),
}

#[derive(Args, Debug, Serialize)]
struct OutputArgs {
    /// Directory for result files and the run manifest.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct SolveArgs {
    instance: PathBuf,
    #[arg(long, default_value_t = 30)]
    max_iter: usize,
    /// Stop once the relative gap, in percent, is at most this value.
    #[arg(long, default_value_t = 5.0)]
    gap: f64,
    /// Penalty used to force or forbid pickups during repair.
    #[arg(long, default_value_t = 1e6)]
    big_m: f64,
    /// Initial step size for every passenger instead of its base profit.
    #[arg(long)]
    base_profit: Option<f64>,
    #[arg(long)]
    threads: Option<usize>,
    /// Disable the pruning rules.
    #[arg(long)]
    no_reductions: bool,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug, Serialize)]
struct DpArgs {
    instance: PathBuf,
    /// Vehicle id; with --virtual, the passenger id owning the virtual vehicle.
    #[arg(long)]
    vehicle: u32,
    #[arg(long = "virtual")]
    is_virtual: bool,
    /// Pickup adjustment per passenger, in passenger order, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    prices: Vec<f64>,
    /// Force every pickup with a large negative price.
    #[arg(long, conflicts_with = "prices")]
    force_all: bool,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug, Serialize)]
struct ReduceArgs {
    instance: PathBuf,
    /// Time window, in steps, for the shared-ride probability estimate.
    #[arg(long)]
    tau: Option<f64>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug, Serialize)]
struct OracleArgs {
    instance: PathBuf,
    #[arg(long, default_value_t = 1e6)]
    big_m: f64,
    #[arg(long, default_value_t = 30)]
    max_iter: usize,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug, Serialize)]
struct ConvertArgs {
    /// Euclidean request file.
    input: PathBuf,
    /// Distance covered per time step.
    #[arg(long, default_value_t = 1.0)]
    speed: f64,
    /// Seat `floor(Q / max load)` requests per vehicle instead of `Q`.
    #[arg(long)]
    load_aware: bool,
    /// Instance file to write.
    #[arg(long)]
    output: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
enum Kind {
    Scenario,
    SharedRide,
    DistantOrigins,
    Random,
    Large,
    Euclidean,
}

#[derive(Args, Debug, Serialize)]
struct GenArgs {
    #[arg(value_enum)]
    kind: Kind,
    /// Scenario name, I to VI.
    #[arg(long, default_value = "I")]
    scenario: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Passenger (or request) count for random kinds.
    #[arg(long)]
    passengers: Option<usize>,
    /// Fixed departure times without arrival windows (large kind).
    #[arg(long)]
    fixed_departure: bool,
    /// File to write.
    #[arg(long)]
    output: PathBuf,
}

fn load(path: &Path, manifest: &mut RunManifest) -> Result<Instance> {
    let inst = load_instance(path).with_context(|| format!("loading {}", path.display()))?;
    for w in &inst.warnings {
        eprintln!("warning: {w}");
    }
    manifest.inputs.push(path.to_path_buf());
    manifest.warnings.extend(inst.warnings.iter().cloned());
    Ok(inst)
}

fn out_file(dir: &Path, name: &str, manifest: &mut RunManifest) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    manifest.outputs.push(path.clone());
    Ok(path)
}

fn solve(args: &SolveArgs, manifest: &mut RunManifest) -> Result<PathBuf> {
    let inst = load(&args.instance, manifest)?;
    let config = LrConfig {
        max_iterations: args.max_iter,
        gap_tolerance_percent: args.gap,
        big_m: args.big_m,
        base_profit_override: args.base_profit,
        threads: args.threads,
        use_reductions: !args.no_reductions,
    };
    let mut solver = LagrangianSolver::new(&inst, config)?;
    let result = solver.solve()?;
    let dir = &args.output.out_dir;

    let solution = SolutionDocument::new(&inst, &result, |v| solver.network(v));
    write_json(&out_file(dir, "solution.json", manifest)?, &solution)?;
    write_json(
        &out_file(dir, "history.json", manifest)?,
        &HistoryDocument::new(&inst, &result.state.history),
    )?;
    std::fs::write(
        out_file(dir, "history.csv", manifest)?,
        history_csv(&inst, &result.state.history),
    )?;
    for path in &result.state.best_solution {
        if inst.is_virtual(path.vehicle) && path.served.is_empty() {
            continue;
        }
        let rows = extract_trajectory(solver.network(path.vehicle), path);
        let name = format!(
            "trajectory_{}.csv",
            inst.vehicles[path.vehicle].label().replace('*', "virtual")
        );
        std::fs::write(out_file(dir, &name, manifest)?, trajectory_csv(&rows))?;
    }
    println!(
        "cost {:.2}  lower bound {:.2}  gap {:.2}%  iterations {}  unserved {}",
        result.best_upper,
        result.best_lower,
        result.gap_percent.max(0.0),
        result.iterations,
        result.unserved.len()
    );
    Ok(dir.clone())
}

fn dp(args: &DpArgs, manifest: &mut RunManifest) -> Result<PathBuf> {
    let inst = load(&args.instance, manifest)?;
    let v = if args.is_virtual {
        let p = inst
            .passengers
            .iter()
            .position(|p| p.id == args.vehicle)
            .with_context(|| format!("no passenger with id {}", args.vehicle))?;
        inst.virtual_vehicle(p)
    } else {
        inst.physical()
            .iter()
            .position(|v| v.id == args.vehicle)
            .with_context(|| format!("no vehicle with id {}", args.vehicle))?
    };
    let n = inst.passengers.len();
    let adjustments = if args.force_all {
        vec![-1e6; n]
    } else if args.prices.is_empty() {
        vec![0.0; n]
    } else if args.prices.len() == n {
        args.prices.clone()
    } else {
        bail!("expected {n} prices, got {}", args.prices.len());
    };
    let net = VehicleSstNetwork::new(
        &inst.network,
        &inst.passengers,
        &inst.vehicles,
        v,
        &inst.costs,
        None,
    )?;
    let (path, stats) = least_cost_path(&net, &GeneralizedCost { adjustments });
    let path = path.context("no feasible route for this vehicle")?;
    let rows = extract_trajectory(&net, &path);
    let csv = trajectory_csv(&rows);
    let dir = &args.output.out_dir;
    std::fs::write(out_file(dir, "trajectory.csv", manifest)?, &csv)?;
    write_json(
        &out_file(dir, "route.json", manifest)?,
        &VehicleSchedule::new(&inst, &net, &path),
    )?;
    print!("{csv}");
    eprintln!(
        "cost {:.4}  priced cost {:.4}  label updates {} (bound {})",
        path.base_cost,
        path.generalized_cost,
        stats.relaxations,
        net.complexity_bound()
    );
    Ok(dir.clone())
}

fn reduce(args: &ReduceArgs, manifest: &mut RunManifest) -> Result<PathBuf> {
    let inst = load(&args.instance, manifest)?;
    let mut report = build_reduction_report(&inst.network, &inst.passengers, &inst.vehicles);
    if let Some(tau) = args.tau {
        let h = inst
            .physical()
            .iter()
            .map(|v| v.horizon.len())
            .max()
            .unwrap_or(inst.network.base.horizon_end()) as f64;
        report = report.with_rule4(h, tau);
    }
    let doc = ReductionDocument::new(&inst, &report);
    write_json(&out_file(&args.output.out_dir, "reduction.json", manifest)?, &doc)?;
    print!("{}", doc.to_text());
    Ok(args.output.out_dir.clone())
}

#[derive(Serialize)]
struct OracleDocument {
    format_version: u32,
    optimum: Option<f64>,
    routes: Vec<VehicleSchedule>,
    lower_bound: f64,
    upper_bound: f64,
    /// Whether the optimum lies between the Lagrangian bounds.
    sandwiched: bool,
}

fn oracle(args: &OracleArgs, manifest: &mut RunManifest) -> Result<PathBuf> {
    let inst = load(&args.instance, manifest)?;
    let exact = solve_instance(&inst, args.big_m)?;
    let config = LrConfig {
        max_iterations: args.max_iter,
        gap_tolerance_percent: 0.0,
        big_m: args.big_m,
        ..LrConfig::default()
    };
    let result = LagrangianSolver::new(&inst, config)?.solve()?;
    let mut routes = Vec::new();
    if let Some(sol) = &exact.solution {
        for (v, &j) in sol.chosen.iter().enumerate() {
            let pattern = &exact.patterns[v][j];
            if inst.is_virtual(v) && pattern.serves.is_empty() {
                continue;
            }
            let net = VehicleSstNetwork::new(
                &inst.network,
                &inst.passengers,
                &inst.vehicles,
                v,
                &inst.costs,
                None,
            )?;
            routes.push(VehicleSchedule::new(&inst, &net, &pattern.path));
        }
    }
    let optimum = exact.solution.as_ref().map(|s| s.total_cost);
    let sandwiched = optimum.is_some_and(|o| result.best_lower <= o + 1e-6 && o <= result.best_upper + 1e-6);
    let doc = OracleDocument {
        format_version: 1,
        optimum,
        routes,
        lower_bound: result.best_lower,
        upper_bound: result.best_upper,
        sandwiched,
    };
    write_json(&out_file(&args.output.out_dir, "oracle.json", manifest)?, &doc)?;
    match optimum {
        Some(o) => println!(
            "optimum {o:.4}  lower bound {:.4}  upper bound {:.4}  sandwiched {sandwiched}",
            result.best_lower, result.best_upper
        ),
        None => println!("no partition serves every passenger"),
    }
    Ok(args.output.out_dir.clone())
}

fn convert(args: &ConvertArgs, manifest: &mut RunManifest) -> Result<PathBuf> {
    let text =
        std::fs::read_to_string(&args.input).with_context(|| format!("reading {}", args.input.display()))?;
    let e: EuclideanInstance =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", args.input.display()))?;
    manifest.inputs.push(args.input.clone());
    let mode = if args.load_aware {
        LoadMode::LoadAware
    } else {
        LoadMode::UnitSlots
    };
    let inst = convert_euclidean(&e, args.speed, mode)?;
    save_instance(&inst, &args.output)?;
    manifest.outputs.push(args.output.clone());
    Ok(parent(&args.output))
}

fn gen(args: &GenArgs, manifest: &mut RunManifest) -> Result<PathBuf> {
    let inst = match args.kind {
        Kind::Scenario => scenario_instance(args.scenario.parse::<Scenario>()?),
        Kind::SharedRide => shared_ride_instance(),
        Kind::DistantOrigins => distant_origins_instance(),
        Kind::Random => {
            let mut cfg = RandomConfig::default();
            cfg.passengers = args.passengers.unwrap_or(cfg.passengers);
            random_instance(&cfg, args.seed)
        }
        Kind::Large => {
            let mut cfg = LargeConfig {
                fixed_departure: args.fixed_departure,
                ..LargeConfig::default()
            };
            cfg.passengers = args.passengers.unwrap_or(cfg.passengers);
            large_instance(&cfg, args.seed)
        }
        Kind::Euclidean => {
            let mut cfg = EuclideanGenConfig::default();
            cfg.requests = args.passengers.unwrap_or(cfg.requests);
            let e = random_euclidean(&cfg, args.seed);
            write_json(&args.output, &e)?;
            manifest.outputs.push(args.output.clone());
            return Ok(parent(&args.output));
        }
    };
    save_instance(&inst, &args.output)?;
    manifest.outputs.push(args.output.clone());
    Ok(parent(&args.output))
}

fn parent(path: &Path) -> PathBuf {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    }
}

fn run(cli: Cli) -> Result<()> {
    let start = Instant::now();
    let name = match &cli.command {
        Command::Solve(_) => "solve",
        Command::Dp(_) => "dp",
        Command::Reduce(_) => "reduce",
        Command::Oracle(_) => "oracle",
        Command::Convert(_) => "convert",
        Command::Gen(_) => "gen",
    };
    let mut manifest = RunManifest::new(name, serde_json::to_value(&cli.command)?);
    let dir = match &cli.command {
        Command::Solve(a) => solve(a, &mut manifest),
        Command::Dp(a) => dp(a, &mut manifest),
        Command::Reduce(a) => reduce(a, &mut manifest),
        Command::Oracle(a) => oracle(a, &mut manifest),
        Command::Convert(a) => convert(a, &mut manifest),
        Command::Gen(a) => gen(a, &mut manifest),
    }?;
    manifest.elapsed_seconds = start.elapsed().as_secs_f64();
    std::fs::create_dir_all(&dir)?;
    write_json(&dir.join("manifest.json"), &manifest)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
