//! Command-line surface: reproducible batch runs with file artifacts.
//!
//! Four subcommands cover the workflow end to end: `scenario` builds a
//! synthetic scenario file, `frontier` sweeps the load-energy frontier,
//! `compare` runs all schemes through a Monte Carlo evaluation, and
//! `replay` re-executes a recorded manifest and verifies byte-identical
//! outputs. Every command writes a [`manifest::RunManifest`] next to its
//! primary output. All randomness flows from explicit `--seed` flags;
//! nothing reads the clock for anything that affects results.
//!
//! Exit codes: 0 success, 2 usage/config/input error, 3 infeasible
//! problem, 4 internal solver diagnostic (monotonicity abort, replay
//! divergence).

pub mod manifest;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::baselines;
use crate::graph::{build_graph, solve_horizon, EdgeWeight, HorizonOutcome};
use crate::interval::Solver;
use crate::pareto::{sweep_frontier, ParetoFrontier, SweepError};
use crate::scenario::{build_scenario, Scenario, ScenarioConfig};
use crate::strategy::{Scheme, Strategy};
use crate::units::energy_dbm_slots;
use manifest::{manifest_path_for, RunManifest};

#[derive(Parser)]
#[command(name = "skyfront", version, about = "Pareto-front planner for aerial status updating")]
struct Cli {
    /// Worker thread cap for parallel sections; 0 uses every core.
    /// The first command in a process pins the pool size.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a scenario file from a config.
    Scenario(ScenarioArgs),
    /// Sweep the complete load-energy frontier of a scenario.
    Frontier(FrontierArgs),
    /// Run every scheme over the load grid with a Monte Carlo evaluation.
    Compare(CompareArgs),
    /// Re-run a recorded manifest and verify outputs are byte-identical.
    Replay(ReplayArgs),
}

#[derive(Args)]
struct ScenarioArgs {
    /// Scenario config JSON.
    #[arg(long)]
    config: PathBuf,
    /// Master seed; overrides the config's seed field.
    #[arg(long)]
    seed: u64,
    /// Output scenario JSON path.
    #[arg(long)]
    out: PathBuf,
    /// Override the number of ground stations.
    #[arg(long)]
    n_bs: Option<usize>,
    /// Override the number of resource blocks.
    #[arg(long)]
    n_rb: Option<usize>,
    /// Override the horizon length in slots.
    #[arg(long)]
    horizon: Option<usize>,
    /// Override the update payload in bits.
    #[arg(long)]
    v_bar: Option<f64>,
    /// Override the peak age bound in slots.
    #[arg(long)]
    tau_bar: Option<usize>,
}

#[derive(Args)]
struct FrontierArgs {
    /// Scenario JSON produced by the `scenario` command.
    #[arg(long)]
    scenario: PathBuf,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
    /// Also write the frontier with full strategies as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Dump each swept timing graph as CSV (i, j, weight_or_inf);
    /// writes one file per load value next to the given base path.
    /// Rebuilds the graphs, roughly doubling runtime.
    #[arg(long)]
    dump_graph: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    /// Scenario JSON produced by the `scenario` command.
    #[arg(long)]
    scenario: PathBuf,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
    /// Monte Carlo runs per (scheme, load) cell.
    #[arg(long)]
    runs: usize,
    /// Master evaluation seed, shared by every cell.
    #[arg(long)]
    seed: u64,
    /// Optional per-run age traces, JSON lines.
    #[arg(long)]
    traces: Option<PathBuf>,
}

#[derive(Args)]
struct ReplayArgs {
    /// Manifest written by a previous run.
    #[arg(long)]
    manifest: PathBuf,
}

/// Entry point for the binary: parses `std::env::args`.
pub fn run() -> i32 {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    run_args(&argv)
}

/// Parses and executes one argument vector; returns the exit code.
pub fn run_args(argv: &[String]) -> i32 {
    let with_bin = std::iter::once("skyfront".to_string()).chain(argv.iter().cloned());
    let cli = match Cli::try_parse_from(with_bin) {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { 2 } else { 0 };
            let _ = err.print();
            return code;
        }
    };
    if cli.threads > 0 {
        // First caller wins; later attempts to resize are no-ops.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global();
    }
    let result = match cli.command {
        Command::Scenario(args) => cmd_scenario(args),
        Command::Frontier(args) => cmd_frontier(args),
        Command::Compare(args) => cmd_compare(args),
        Command::Replay(args) => cmd_replay(args),
    };
    match result {
        Ok(()) => 0,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            failure.code
        }
    }
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Failure {
        Failure { code: 2, message: message.into() }
    }

    fn infeasible(message: impl Into<String>) -> Failure {
        Failure { code: 3, message: message.into() }
    }

    fn diagnostic(message: impl Into<String>) -> Failure {
        Failure { code: 4, message: message.into() }
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path, what: &str) -> Result<T, Failure> {
    let body = std::fs::read_to_string(path)
        .map_err(|e| Failure::usage(format!("cannot read {what} {}: {e}", path.display())))?;
    serde_json::from_str(&body)
        .map_err(|e| Failure::usage(format!("invalid {what} {}: {e}", path.display())))
}

fn write_text(path: &Path, body: &str, what: &str) -> Result<(), Failure> {
    std::fs::write(path, body)
        .map_err(|e| Failure::usage(format!("cannot write {what} {}: {e}", path.display())))
}

fn load_scenario(path: &Path) -> Result<Scenario, Failure> {
    let scenario: Scenario = read_json(path, "scenario")?;
    scenario
        .validate()
        .map_err(|why| Failure::usage(format!("inconsistent scenario {}: {why}", path.display())))?;
    Ok(scenario)
}

fn finish_manifest(
    mut manifest: RunManifest,
    inputs: &[&Path],
    outputs: &[&Path],
    primary: &Path,
) -> Result<(), Failure> {
    for p in inputs {
        manifest
            .record_input(p)
            .map_err(|e| Failure::usage(format!("cannot digest input {}: {e}", p.display())))?;
    }
    for p in outputs {
        manifest
            .record_output(p)
            .map_err(|e| Failure::usage(format!("cannot digest output {}: {e}", p.display())))?;
    }
    let mpath = manifest_path_for(primary);
    manifest
        .write(&mpath)
        .map_err(|e| Failure::usage(format!("cannot write manifest {}: {e}", mpath.display())))
}

fn path_arg(p: &Path) -> String {
    p.display().to_string()
}

// ---- scenario ----

fn cmd_scenario(args: ScenarioArgs) -> Result<(), Failure> {
    let mut config: ScenarioConfig = read_json(&args.config, "config")?;
    if let Some(n) = args.n_bs {
        config.n_bs = n;
    }
    if let Some(k) = args.n_rb {
        config.n_rb = k;
    }
    if let Some(t) = args.horizon {
        config.horizon_slots = t;
    }
    if let Some(v) = args.v_bar {
        config.v_bar_bits = v;
    }
    if let Some(tau) = args.tau_bar {
        config.tau_bar_slots = tau;
    }
    config.seed = args.seed;
    config
        .validate()
        .map_err(|e| Failure::usage(format!("invalid config: {e}")))?;

    let scenario = build_scenario(&config);
    let mut body = serde_json::to_string_pretty(&scenario).expect("scenario serializes");
    body.push('\n');
    write_text(&args.out, &body, "scenario")?;

    let mut argv = vec![
        "scenario".to_string(),
        "--config".into(),
        path_arg(&args.config),
        "--seed".into(),
        args.seed.to_string(),
        "--out".into(),
        path_arg(&args.out),
    ];
    for (flag, value) in [
        ("--n-bs", args.n_bs.map(|v| v.to_string())),
        ("--n-rb", args.n_rb.map(|v| v.to_string())),
        ("--horizon", args.horizon.map(|v| v.to_string())),
        ("--v-bar", args.v_bar.map(|v| format!("{v:?}"))),
        ("--tau-bar", args.tau_bar.map(|v| v.to_string())),
    ] {
        if let Some(value) = value {
            argv.push(flag.into());
            argv.push(value);
        }
    }
    finish_manifest(
        RunManifest::new(argv),
        &[&args.config],
        &[&args.out],
        &args.out,
    )?;
    println!(
        "wrote {} (N={}, K={}, T={}, seed {})",
        args.out.display(),
        config.n_bs,
        config.n_rb,
        config.horizon_slots,
        config.seed
    );
    Ok(())
}

// ---- frontier ----

fn frontier_csv(frontier: &ParetoFrontier) -> String {
    let mut csv = String::from("theta,energy_watt_slots,energy_dbm_slots,n_samples_I,feasible\n");
    for theta in 1..=frontier.theta_upper {
        match frontier.point(theta) {
            Some(point) => {
                let energy = point.energy;
                let _ = writeln!(
                    csv,
                    "{theta},{energy:?},{:?},{},true",
                    energy_dbm_slots(energy),
                    point.strategy.instants.len()
                );
            }
            None => {
                let _ = writeln!(csv, "{theta},,,,false");
            }
        }
    }
    csv
}

fn graph_dump_path(base: &Path, theta: usize) -> PathBuf {
    let stem = base.file_stem().unwrap_or_default().to_string_lossy();
    let ext = base
        .extension()
        .map(|e| format!(".{}", e.to_string_lossy()))
        .unwrap_or_default();
    base.with_file_name(format!("{stem}_theta{theta}{ext}"))
}

fn cmd_frontier(args: FrontierArgs) -> Result<(), Failure> {
    let scenario = load_scenario(&args.scenario)?;
    let params = scenario.link_params();
    let config = &scenario.config;
    let frontier = sweep_frontier(
        &scenario.stats,
        params,
        config.tau_bar_slots,
        config.v_bar_bits,
    )
    .map_err(|e| match e {
        SweepError::WhollyInfeasible { .. } => Failure::infeasible(e.to_string()),
        SweepError::MonotonicityBreak { .. } => Failure::diagnostic(e.to_string()),
    })?;

    write_text(&args.out, &frontier_csv(&frontier), "frontier csv")?;
    let mut outputs: Vec<PathBuf> = vec![args.out.clone()];

    if let Some(json_path) = &args.json {
        let mut body = serde_json::to_string_pretty(&frontier).expect("frontier serializes");
        body.push('\n');
        write_text(json_path, &body, "frontier json")?;
        outputs.push(json_path.clone());
    }

    if let Some(base) = &args.dump_graph {
        for theta in 1..=frontier.theta_upper {
            let solver = Solver::new(&scenario.stats, params, theta);
            let graph = build_graph(&solver, config.tau_bar_slots, config.v_bar_bits);
            let mut csv = String::from("i,j,weight_or_inf\n");
            for (i, j, w) in graph.edges() {
                match w {
                    EdgeWeight::Finite(e) => {
                        let _ = writeln!(csv, "{i},{j},{e:?}");
                    }
                    EdgeWeight::Unreachable => {
                        let _ = writeln!(csv, "{i},{j},inf");
                    }
                }
            }
            let path = graph_dump_path(base, theta);
            write_text(&path, &csv, "graph dump")?;
            outputs.push(path);
        }
    }

    let mut argv = vec![
        "frontier".to_string(),
        "--scenario".into(),
        path_arg(&args.scenario),
        "--out".into(),
        path_arg(&args.out),
    ];
    if let Some(p) = &args.json {
        argv.push("--json".into());
        argv.push(path_arg(p));
    }
    if let Some(p) = &args.dump_graph {
        argv.push("--dump-graph".into());
        argv.push(path_arg(p));
    }
    let output_refs: Vec<&Path> = outputs.iter().map(PathBuf::as_path).collect();
    finish_manifest(
        RunManifest::new(argv),
        &[&args.scenario],
        &output_refs,
        &args.out,
    )?;
    println!(
        "frontier spans theta {}..={} with energies {:?}..{:?} watt-slots",
        frontier.theta_lower,
        frontier.theta_upper,
        frontier.points.first().map(|p| p.energy).unwrap_or(f64::NAN),
        frontier.points.last().map(|p| p.energy).unwrap_or(f64::NAN),
    );
    Ok(())
}

// ---- compare ----

fn plan_scheme(
    scheme: Scheme,
    solver: &Solver,
    age_limit: usize,
    target: f64,
) -> Option<Strategy> {
    match scheme {
        Scheme::Proposed => match solve_horizon(solver, age_limit, target) {
            HorizonOutcome::Feasible(s) => Some(s),
            HorizonOutcome::Infeasible { .. } => None,
        },
        Scheme::Instantaneous => baselines::instantaneous(solver, age_limit, target).ok(),
        Scheme::Average => baselines::average(solver, age_limit, target).ok(),
        Scheme::Periodic => baselines::periodic(solver, age_limit, target).ok(),
    }
}

fn cmd_compare(args: CompareArgs) -> Result<(), Failure> {
    if args.runs == 0 {
        return Err(Failure::usage("--runs must be at least 1"));
    }
    let scenario = load_scenario(&args.scenario)?;
    let params = scenario.link_params();
    let config = &scenario.config;
    let mut csv =
        String::from("scheme,theta,energy_dbm_slots,rb_total,aoi_success_rate,runs,seed,feasible\n");
    let mut trace_lines = String::new();
    for scheme in Scheme::all() {
        for theta in 1..=config.n_rb {
            let solver = Solver::new(&scenario.stats, params, theta);
            match plan_scheme(scheme, &solver, config.tau_bar_slots, config.v_bar_bits) {
                Some(strategy) => {
                    let report = crate::eval::monte_carlo_eval(
                        &strategy,
                        &scenario.stats,
                        params,
                        config.tau_bar_slots,
                        args.runs,
                        args.seed,
                        args.traces.is_some(),
                    );
                    let _ = writeln!(
                        csv,
                        "{},{theta},{:?},{},{:?},{},{},true",
                        scheme.name(),
                        energy_dbm_slots(report.expected_energy),
                        report.rb_total,
                        report.aoi_success_rate,
                        args.runs,
                        args.seed
                    );
                    if let Some(traces) = &report.per_run_traces {
                        for (run, trace) in traces.iter().enumerate() {
                            let line = serde_json::json!({
                                "scheme": scheme.name(),
                                "theta": theta,
                                "run": run,
                                "ages": trace,
                            });
                            trace_lines.push_str(&line.to_string());
                            trace_lines.push('\n');
                        }
                    }
                }
                None => {
                    let _ = writeln!(
                        csv,
                        "{},{theta},,,,{},{},false",
                        scheme.name(),
                        args.runs,
                        args.seed
                    );
                }
            }
        }
    }
    write_text(&args.out, &csv, "comparison csv")?;
    let mut outputs: Vec<PathBuf> = vec![args.out.clone()];
    if let Some(tpath) = &args.traces {
        write_text(tpath, &trace_lines, "trace dump")?;
        outputs.push(tpath.clone());
    }

    let mut argv = vec![
        "compare".to_string(),
        "--scenario".into(),
        path_arg(&args.scenario),
        "--out".into(),
        path_arg(&args.out),
        "--runs".into(),
        args.runs.to_string(),
        "--seed".into(),
        args.seed.to_string(),
    ];
    if let Some(p) = &args.traces {
        argv.push("--traces".into());
        argv.push(path_arg(p));
    }
    let output_refs: Vec<&Path> = outputs.iter().map(PathBuf::as_path).collect();
    finish_manifest(
        RunManifest::new(argv),
        &[&args.scenario],
        &output_refs,
        &args.out,
    )?;
    println!("wrote {}", args.out.display());
    Ok(())
}

// ---- replay ----

fn cmd_replay(args: ReplayArgs) -> Result<(), Failure> {
    let manifest = RunManifest::load(&args.manifest).map_err(Failure::usage)?;
    let stale = RunManifest::stale_entries(&manifest.inputs);
    if !stale.is_empty() {
        return Err(Failure::usage(format!(
            "inputs changed since the recorded run:\n  {}",
            stale.join("\n  ")
        )));
    }
    let code = run_args(&manifest.argv);
    if code != 0 {
        return Err(Failure {
            code,
            message: format!("replayed command exited with {code}"),
        });
    }
    let diverged = RunManifest::stale_entries(&manifest.outputs);
    if !diverged.is_empty() {
        return Err(Failure::diagnostic(format!(
            "replay is not byte-identical:\n  {}",
            diverged.join("\n  ")
        )));
    }
    println!(
        "replay of `{}` reproduced {} output(s) byte-identically",
        manifest.argv.join(" "),
        manifest.outputs.len()
    );
    Ok(())
}
