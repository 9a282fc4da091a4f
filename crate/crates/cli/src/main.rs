// Copyright 2026 The swarmsim Authors
// SPDX-License-Identifier: Apache-2.0

//! `swarmsim`: run scenarios, batches and the named experiments from the
//! command line.
//!
//! Exit status is 0 on success, 1 on usage or configuration errors and 2 if
//! the engine hits an internal assertion.

use std::error::Error;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use swarmsim::error_models::VisionErrorKind;
use swarmsim::harness::{
    election_curve, election_sweep, float_pathology_experiment, read_witness, replay,
    run_batch_detailed, run_batch, run_recorded, with_tries, write_witness, Mover, ScenarioConfig,
    WitnessFile, WitnessHeader, WITNESS_VERSION,
};
use swarmsim::report::{write_csv, AggregateRow, CurveRow, RunRow, ScatterRow};

type CliResult = Result<(), Box<dyn Error>>;

#[derive(Parser)]
#[command(name = "swarmsim", version, about = "Monte-Carlo simulator for oblivious mobile robots")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// One seeded run; prints the outcome as JSON.
    Run(RunArgs),
    /// A batch; prints one aggregate CSV row.
    Bench(BenchArgs),
    /// Election error map (x, y, class, per-robot leaders) or its curve over
    /// the number of virtual checks.
    Scatter(ScatterArgs),
    /// Adjacent-float midpoint stall experiment.
    Pathology(PathologyArgs),
    /// Re-executes a witness file and prints the trace as JSON.
    Replay(ReplayArgs),
}

#[derive(Args)]
struct ConfigArgs {
    /// Scenario file (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Override a config field, e.g. `--set vision.err=0.001`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Master seed; replaces the seed in the config.
    #[arg(long, env = "SWARMSIM_SEED")]
    seed: Option<u64>,
    /// Print the effective configuration and exit.
    #[arg(long)]
    print_config: bool,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Placement index (grid sweeps only).
    #[arg(long, default_value_t = 0)]
    point_index: u64,
    /// Write the decision log to this file when the run ends in a defeat
    /// with a loop witness.
    #[arg(long)]
    witness: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long)]
    runs: Option<u64>,
    /// Wall-clock budget in seconds, used when no run count is given.
    #[arg(long)]
    budget_secs: Option<f64>,
    #[arg(long, default_value_t = default_parallelism())]
    parallelism: usize,
    /// Aggregate CSV destination (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write one CSV row per run here.
    #[arg(long)]
    runs_csv: Option<PathBuf>,
}

#[derive(Args)]
struct ScatterArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Vision error bound; switches the vision model to absolute if unset.
    #[arg(long)]
    err: Option<f64>,
    /// Number of sampled configurations (defaults to `runs` in the config).
    #[arg(long)]
    points: Option<u64>,
    #[arg(long)]
    nb_tries: Option<u32>,
    /// Emit the class fractions for nb_tries = 0..=N instead of the map.
    #[arg(long, value_name = "N")]
    curve: Option<u32>,
    #[arg(long, default_value_t = default_parallelism())]
    parallelism: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum MoverArg {
    R1,
    R2,
    Both,
}

#[derive(Args)]
struct PathologyArgs {
    #[arg(long, value_enum, default_value_t = MoverArg::Both)]
    mover: MoverArg,
    #[arg(long, default_value_t = 1_000_000)]
    attempts: u64,
    #[arg(long, env = "SWARMSIM_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = default_parallelism())]
    parallelism: usize,
}

#[derive(Args)]
struct ReplayArgs {
    witness: PathBuf,
    /// Extra passes through the loop after the recorded prefix.
    #[arg(long, default_value_t = 3)]
    repetitions: u32,
}

fn default_parallelism() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn load_config(args: &ConfigArgs) -> Result<ScenarioConfig, Box<dyn Error>> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| format!("{}: {e}", args.config.display()))?;
    let mut cfg = ScenarioConfig::from_json(&text)?;
    for o in &args.overrides {
        let (key, value) = o
            .split_once('=')
            .ok_or_else(|| format!("--set expects KEY=VALUE, got `{o}`"))?;
        cfg = cfg.with_override(key.trim(), value.trim())?;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

/// Prints the config and returns true if `--print-config` was given.
fn maybe_print(args: &ConfigArgs, cfg: &ScenarioConfig) -> bool {
    if args.print_config {
        let _ = emit(&cfg.to_json_pretty());
    }
    args.print_config
}

fn emit(text: &str) -> io::Result<()> {
    let mut out = io::stdout().lock();
    writeln!(out, "{text}")?;
    out.flush()
}

fn output(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn cmd_run(args: RunArgs) -> CliResult {
    let cfg = load_config(&args.config)?;
    if maybe_print(&args.config, &cfg) {
        return Ok(());
    }
    let prepared = cfg.prepare()?;
    let (outcome, decisions) = run_recorded(&prepared, cfg.seed, args.point_index)?;
    if let (Some(path), Some(w)) = (&args.witness, outcome.verdict.witness()) {
        let file = WitnessFile {
            header: WitnessHeader {
                version: WITNESS_VERSION,
                config: cfg.clone(),
                run_seed: cfg.seed,
                point_index: args.point_index,
                witness: *w,
                verdict: outcome.verdict.label(),
            },
            decisions: decisions[..w.t1 as usize].to_vec(),
        };
        write_witness(&file, BufWriter::new(File::create(path)?))?;
    }
    emit(&serde_json::to_string_pretty(&outcome)?)?;
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> CliResult {
    let mut cfg = load_config(&args.config)?;
    if let Some(r) = args.runs {
        cfg.runs = Some(r);
    }
    if let Some(b) = args.budget_secs {
        cfg.budget_secs = Some(b);
        if args.runs.is_none() {
            cfg.runs = None;
        }
    }
    if maybe_print(&args.config, &cfg) {
        return Ok(());
    }
    let prepared = cfg.prepare()?;
    for w in &prepared.warnings {
        eprintln!("warning: {w}");
    }
    let stats = match &args.runs_csv {
        Some(path) => {
            let (stats, runs) = run_batch_detailed(&prepared, args.parallelism)?;
            let rows: Vec<RunRow> = runs.iter().map(|(i, o)| RunRow::new(*i, o)).collect();
            write_csv(BufWriter::new(File::create(path)?), &rows)?;
            stats
        }
        None => run_batch(&prepared, args.parallelism)?,
    };
    write_csv(output(args.out.as_deref())?, &[AggregateRow::from(&stats)])?;
    Ok(())
}

fn cmd_scatter(args: ScatterArgs) -> CliResult {
    let mut cfg = load_config(&args.config)?;
    if let Some(err) = args.err {
        if cfg.vision.kind == VisionErrorKind::None {
            cfg.vision.kind = VisionErrorKind::Absolute;
        }
        cfg.vision.err = err;
        cfg.vision.err_dist = err;
    }
    if let Some(t) = args.nb_tries {
        cfg.algorithm = with_tries(&cfg.algorithm, t);
    }
    let points = args.points.or(cfg.runs).ok_or("set --points or `runs` in the config")?;
    cfg.runs = Some(points);
    cfg.validate()?;
    if maybe_print(&args.config, &cfg) {
        return Ok(());
    }
    let out = output(args.out.as_deref())?;
    if let Some(max) = args.curve {
        let tries: Vec<u32> = (0..=max).collect();
        let curve = election_curve(&cfg, points, &tries, args.parallelism)?;
        let rows: Vec<CurveRow> = curve.iter().map(CurveRow::from).collect();
        write_csv(out, &rows)?;
    } else {
        let sweep = election_sweep(&cfg.prepare()?, points, args.parallelism, true)?;
        let rows: Vec<ScatterRow> = sweep.points.iter().map(ScatterRow::from).collect();
        write_csv(out, &rows)?;
        let c = sweep.counts;
        eprintln!(
            "valid {} detected {} undetected {} ({:.4}% undetected)",
            c.valid,
            c.detected,
            c.undetected,
            100.0 * c.undetected_fraction()
        );
    }
    Ok(())
}

fn cmd_pathology(args: PathologyArgs) -> CliResult {
    let movers: &[Mover] = match args.mover {
        MoverArg::R1 => &[Mover::R1],
        MoverArg::R2 => &[Mover::R2],
        MoverArg::Both => &[Mover::R1, Mover::R2],
    };
    for &m in movers {
        let r = float_pathology_experiment(m, args.attempts, args.seed, args.parallelism)?;
        let mut v = serde_json::to_value(r)?;
        v["stuck_fraction"] = r.stuck_fraction().into();
        emit(&serde_json::to_string(&v)?)?;
    }
    Ok(())
}

fn cmd_replay(args: ReplayArgs) -> CliResult {
    let file = File::open(&args.witness).map_err(|e| format!("{}: {e}", args.witness.display()))?;
    let witness = read_witness(BufReader::new(file))?;
    let report = replay(&witness, args.repetitions)?;
    let mut v = serde_json::to_value(&report)?;
    v["loop_confirmed"] = report.loop_confirmed().into();
    emit(&serde_json::to_string_pretty(&v)?)?;
    Ok(())
}

fn dispatch(cli: Cli) -> CliResult {
    match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Scatter(a) => cmd_scatter(a),
        Command::Pathology(a) => cmd_pathology(a),
        Command::Replay(a) => cmd_replay(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match std::panic::catch_unwind(|| dispatch(cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(_) => ExitCode::from(2),
    }
}
