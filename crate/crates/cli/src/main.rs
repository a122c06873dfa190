//! `cvgate`: compile gate plans, run experiments, check identities.
//!
//! Exit status: 0 on success, 1 when a check or tolerance fails, 2 for
//! configuration or argument errors, 3 when a run is truncation-unsafe.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::thread;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use cvgate::compiler::{
    compile_cross_p2x, compile_cross_x2x, compile_number_coupler, compile_quad_x, compile_squeezer, db_to_r,
    SplitStrategy,
};
use cvgate::experiments::{
    self, core_property_checks, preset, write_artifacts, Check, Experiment, ExperimentConfig, ExperimentResult,
    ResolvabilityConfig, PRESET_NAMES,
};
use cvgate::{Error, GateSequence};

/// Environment variable that replaces the primary cutoff of every config.
const CUTOFF_ENV: &str = "CVGATE_CUTOFF";

#[derive(Parser, Debug)]
#[command(
    name = "cvgate",
    version,
    about = "Cubic-phase-gate compiler and truncated Fock-space experiments"
)]
struct Cli {
    /// Directory for artifacts.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// More output on stderr (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compile a target unitary to a gate sequence and print the plan.
    Compile(CompileArgs),
    /// Run experiments from config files or preset names.
    Run(RunArgs),
    /// Run a verification suite; exits 1 if any check fails.
    Check(CheckArgs),
    /// Print the resolvability table as CSV.
    Table(TableArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Target {
    Squeeze,
    QuadX,
    CrossX2x,
    CrossP2x,
    NumberCoupler,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Split {
    Balanced,
    FixedCubic,
    FixedShift,
}

#[derive(Args, Debug)]
struct CompileArgs {
    #[arg(long, value_enum)]
    target: Target,
    /// Squeezing in dB (squeeze target).
    #[arg(long, conflicts_with = "r")]
    db: Option<f64>,
    /// Squeezing in nepers (squeeze target).
    #[arg(long)]
    r: Option<f64>,
    #[arg(long, value_enum, default_value = "balanced")]
    split: Split,
    /// Shift strength; also the fixed value for `--split fixed-shift`.
    #[arg(long)]
    t1: Option<f64>,
    /// Cubic strength parameter; also the fixed value for `--split fixed-cubic`.
    #[arg(long)]
    t2: Option<f64>,
    #[arg(long)]
    theta_total: Option<f64>,
    #[arg(long)]
    theta_step: Option<f64>,
    #[arg(long, default_value_t = 1)]
    order: u32,
}

#[derive(Args, Debug)]
struct RunArgs {
    /// Config files or preset names; several run concurrently.
    #[arg(value_name = "CONFIG")]
    configs: Vec<String>,
    /// Same as a positional CONFIG.
    #[arg(long = "config", value_name = "CONFIG")]
    config_flags: Vec<String>,
    /// List preset names and exit.
    #[arg(long)]
    list_presets: bool,
    /// Print each resolved config as TOML instead of running it.
    #[arg(long)]
    show_config: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Suite {
    Identities,
    Trotter,
    Core,
    All,
}

#[derive(Args, Debug)]
struct CheckArgs {
    #[arg(long, value_enum, default_value = "all")]
    suite: Suite,
    /// Cutoff for the core suite.
    #[arg(long, default_value_t = 32)]
    cutoff: usize,
}

#[derive(Args, Debug)]
struct TableArgs {
    /// Interaction times (comma separated).
    #[arg(long, value_delimiter = ',')]
    thetas: Option<Vec<f64>>,
    /// Squeezing values in dB (comma separated).
    #[arg(long, value_delimiter = ',')]
    dbs: Option<Vec<f64>>,
    #[arg(long)]
    theta_step: Option<f64>,
}

/// Failure classes, ordered by exit precedence.
#[derive(Debug)]
enum Failure {
    Config(String),
    Truncation(String),
    Check(String),
    Other(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Truncation(_) => 3,
            Failure::Check(_) | Failure::Other(_) => 1,
        }
    }

    fn rank(&self) -> u8 {
        match self {
            Failure::Config(_) => 0,
            Failure::Truncation(_) => 1,
            Failure::Check(_) => 2,
            Failure::Other(_) => 3,
        }
    }

    fn report(&self) {
        match self {
            Failure::Config(m) => eprintln!("{m}"),
            Failure::Truncation(m) => eprintln!("truncation-unsafe: {m}"),
            Failure::Check(m) => eprintln!("tolerance breach: {m}"),
            Failure::Other(m) => eprintln!("error: {m}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_)
            | Error::Parse { .. }
            | Error::Domain(_)
            | Error::InvalidGate(_)
            | Error::InvalidDimension(_)
            | Error::LevelOutOfRange { .. } => Failure::Config(e.to_string()),
            Error::TruncationUnsafe { .. } => Failure::Truncation(e.to_string()),
            other => Failure::Other(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let failures = match &cli.command {
        Command::Compile(args) => single(compile(args, &cli)),
        Command::Run(args) => run(args, &cli),
        Command::Check(args) => check(args, &cli),
        Command::Table(args) => single(table(args, &cli)),
    };
    for f in &failures {
        f.report();
    }
    match failures.iter().min_by_key(|f| f.rank()) {
        Some(f) => ExitCode::from(f.code()),
        None => ExitCode::SUCCESS,
    }
}

fn single(result: Result<(), Failure>) -> Vec<Failure> {
    result.err().into_iter().collect()
}

fn cutoff_override() -> Result<Option<usize>, Failure> {
    match std::env::var(CUTOFF_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map(Some)
            .map_err(|e| Failure::Config(format!("config error: {CUTOFF_ENV}={v}: {e}"))),
        Err(_) => Ok(None),
    }
}

fn split_strategy(args: &CompileArgs) -> Result<SplitStrategy, Failure> {
    let need =
        |v: Option<f64>, flag: &str| v.ok_or_else(|| Failure::Config(format!("config error: --split needs {flag}")));
    Ok(match args.split {
        Split::Balanced => SplitStrategy::Balanced,
        Split::FixedCubic => SplitStrategy::FixedCubic {
            t2: need(args.t2, "--t2")?,
        },
        Split::FixedShift => SplitStrategy::FixedShift {
            t1: need(args.t1, "--t1")?,
        },
    })
}

fn compile(args: &CompileArgs, cli: &Cli) -> Result<(), Failure> {
    let need = |v: Option<f64>, flag: &str| {
        v.ok_or_else(|| Failure::Config(format!("config error: --target {:?} needs {flag}", args.target)))
    };
    let (report, sequence): (serde_json::Value, GateSequence) = match args.target {
        Target::Squeeze => {
            let r = match (args.db, args.r) {
                (Some(db), _) => db_to_r(db),
                (None, Some(r)) => r,
                (None, None) => return Err(Failure::Config("config error: squeeze needs --db or --r".into())),
            };
            let plan = compile_squeezer(r, split_strategy(args)?)?;
            let seq = plan.sequence.clone();
            let mut report = serde_json::to_value(&plan).map_err(|e| Failure::Other(e.to_string()))?;
            if let Some(obj) = report.as_object_mut() {
                obj.remove("sequence");
                obj.insert("cubic_strength".into(), json!(plan.t2 / 3.0));
            }
            (report, seq)
        }
        Target::QuadX | Target::CrossX2x | Target::CrossP2x => {
            let (t1, t2) = (need(args.t1, "--t1")?, need(args.t2, "--t2")?);
            let seq = match args.target {
                Target::QuadX => compile_quad_x(t1, t2),
                Target::CrossX2x => compile_cross_x2x(t1, t2),
                _ => compile_cross_p2x(t1, t2),
            };
            (json!({ "t1": t1, "t2": t2, "t": t1 * t2 }), seq)
        }
        Target::NumberCoupler => {
            let total = need(args.theta_total, "--theta-total")?;
            let step = need(args.theta_step, "--theta-step")?;
            let plan = compile_number_coupler(total, step, args.order, split_strategy(args)?)?;
            let seq = plan.sequence.clone();
            let mut report = serde_json::to_value(&plan).map_err(|e| Failure::Other(e.to_string()))?;
            if let Some(obj) = report.as_object_mut() {
                obj.remove("sequence");
            }
            (report, seq)
        }
    };
    let report = json!({
        "target": format!("{:?}", args.target),
        "plan": report,
        "gate_count": sequence.len(),
        "global_phase": sequence.global_phase(),
    });
    let text = serde_json::to_string_pretty(&report).map_err(|e| Failure::Other(e.to_string()))?;
    if let Some(dir) = &cli.out {
        std::fs::create_dir_all(dir).map_err(|e| Failure::Other(e.to_string()))?;
        write_file(&dir.join("plan.json"), &text)?;
        write_file(&dir.join("sequence.txt"), &sequence.to_string())?;
    }
    if cli.verbose > 0 {
        eprint!("{sequence}");
    }
    writeln!(std::io::stdout(), "{text}").map_err(|e| Failure::Other(e.to_string()))
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    std::fs::write(path, contents).map_err(|e| Failure::Other(format!("{}: {e}", path.display())))
}

/// A config argument is a file path if one exists, otherwise a preset name.
fn resolve_config(arg: &str) -> Result<ExperimentConfig, Failure> {
    let path = Path::new(arg);
    if path.exists() {
        return Ok(ExperimentConfig::load(path)?);
    }
    preset(arg).ok_or_else(|| {
        Failure::Config(format!(
            "config error: `{arg}` is neither a readable config file nor a preset ({})",
            PRESET_NAMES.join(", ")
        ))
    })
}

fn prepare(arg: &str, cutoff: Option<usize>) -> Result<ExperimentConfig, Failure> {
    let cfg = resolve_config(arg)?;
    match cutoff {
        Some(c) => Ok(cfg.with_cutoff(c)?),
        None => Ok(cfg),
    }
}

fn run(args: &RunArgs, cli: &Cli) -> Vec<Failure> {
    if args.list_presets {
        for name in PRESET_NAMES {
            println!("{name}");
        }
        return Vec::new();
    }
    let names: Vec<&String> = args.configs.iter().chain(&args.config_flags).collect();
    if names.is_empty() {
        return vec![Failure::Config(
            "config error: run needs at least one config path or preset name".into(),
        )];
    }
    let cutoff = match cutoff_override() {
        Ok(c) => c,
        Err(f) => return vec![f],
    };
    let mut failures = Vec::new();
    let mut configs = Vec::new();
    for name in names {
        match prepare(name, cutoff) {
            Ok(cfg) => configs.push(cfg),
            Err(f) => failures.push(f),
        }
    }
    if !failures.is_empty() {
        return failures;
    }
    if args.show_config {
        for cfg in &configs {
            match cfg.to_toml() {
                Ok(text) => print!("{text}"),
                Err(e) => failures.push(Failure::from(e)),
            }
        }
        return failures;
    }
    let outcomes: Vec<(ExperimentConfig, cvgate::Result<ExperimentResult>)> = thread::scope(|s| {
        let handles: Vec<_> = configs
            .into_iter()
            .map(|cfg| {
                s.spawn(move || {
                    let res = experiments::run(&cfg);
                    (cfg, res)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("experiment thread panicked"))
            .collect()
    });
    let batch = outcomes.len() > 1;
    for (cfg, res) in outcomes {
        match res {
            Ok(result) => {
                print_result(&result, cli.verbose);
                let dir = artifact_dir(cli, &cfg, batch);
                match write_artifacts(&result, &dir) {
                    Ok(arts) => {
                        if cli.verbose > 0 {
                            eprintln!("wrote {}", arts.result.display());
                        }
                    }
                    Err(e) => failures.push(Failure::Other(format!("{}: {e}", dir.display()))),
                }
                failures.extend(check_failures(&result.name, &result.checks));
                if !result.certificate.converged {
                    failures.push(Failure::Check(format!(
                        "{}: headline metrics not converged at cutoffs {:?}",
                        result.name, result.certificate.refined_cutoffs
                    )));
                }
            }
            Err(e) => failures.push(Failure::from(e).with_context(&cfg.name)),
        }
    }
    failures
}

impl Failure {
    fn with_context(self, name: &str) -> Self {
        match self {
            Failure::Config(m) => Failure::Config(format!("{name}: {m}")),
            Failure::Truncation(m) => Failure::Truncation(format!("{name}: {m}")),
            Failure::Check(m) => Failure::Check(format!("{name}: {m}")),
            Failure::Other(m) => Failure::Other(format!("{name}: {m}")),
        }
    }
}

fn artifact_dir(cli: &Cli, cfg: &ExperimentConfig, batch: bool) -> PathBuf {
    match (&cli.out, &cfg.output) {
        (Some(out), _) if batch => out.join(&cfg.name),
        (Some(out), _) => out.clone(),
        (None, Some(path)) => path.clone(),
        (None, None) => PathBuf::from("results").join(&cfg.name),
    }
}

fn check_failures(name: &str, checks: &[Check]) -> Vec<Failure> {
    checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| Failure::Check(format!("{name}: {} = {:e}, expected {}", c.name, c.value, c.criterion)))
        .collect()
}

fn print_result(result: &ExperimentResult, verbose: u8) {
    println!("== {} ({})", result.name, result.kind);
    for (k, v) in &result.headline {
        let delta = result.certificate.deltas.get(k).copied().unwrap_or(f64::NAN);
        println!("  {k:<28} {v:>14.8}   Δ(1.5×) {delta:.2e}");
    }
    for (k, v) in &result.labels {
        println!("  {k:<28} {v:>14}");
    }
    for c in &result.checks {
        let status = if c.passed { "ok" } else { "FAIL" };
        println!(
            "  check {:<22} {:>4}  {:.4e} ({})",
            c.name, status, c.value, c.criterion
        );
    }
    if verbose > 0 {
        for (k, v) in &result.diagnostics {
            println!("  diag {k:<23} {v:.6e}");
        }
        for n in &result.notes {
            println!("  note {n}");
        }
        println!(
            "  max leakage {:.3e}, wall time {:.2}s",
            result.max_leakage, result.wall_time_s
        );
    }
}

fn check(args: &CheckArgs, cli: &Cli) -> Vec<Failure> {
    let cutoff = match cutoff_override() {
        Ok(c) => c,
        Err(f) => return vec![f],
    };
    let mut failures = Vec::new();
    let wants = |s: Suite| args.suite == s || args.suite == Suite::All;
    let mut presets = Vec::new();
    if wants(Suite::Identities) {
        presets.push("identity_suite");
    }
    if wants(Suite::Trotter) {
        presets.push("trotter_order");
    }
    for name in presets {
        let cfg = match prepare(name, cutoff) {
            Ok(c) => c,
            Err(f) => {
                failures.push(f);
                continue;
            }
        };
        match experiments::run(&cfg) {
            Ok(result) => {
                print_result(&result, cli.verbose);
                if let Some(out) = &cli.out {
                    if let Err(e) = write_artifacts(&result, &out.join(name)) {
                        failures.push(Failure::Other(e.to_string()));
                    }
                }
                failures.extend(check_failures(name, &result.checks));
            }
            Err(e) => failures.push(Failure::from(e).with_context(name)),
        }
    }
    if wants(Suite::Core) {
        let c = cutoff.unwrap_or(args.cutoff);
        match core_property_checks(c) {
            Ok(checks) => {
                println!("== core properties (cutoff {c})");
                for ch in &checks {
                    let status = if ch.passed { "ok" } else { "FAIL" };
                    println!(
                        "  check {:<30} {:>4}  {:.4e} ({})",
                        ch.name, status, ch.value, ch.criterion
                    );
                }
                failures.extend(check_failures("core", &checks));
            }
            Err(e) => failures.push(Failure::from(e).with_context("core")),
        }
    }
    failures
}

fn table(args: &TableArgs, cli: &Cli) -> Result<(), Failure> {
    let mut cfg = preset("resolvability_sweep").expect("built-in preset");
    if let Experiment::ResolvabilityTable(ResolvabilityConfig {
        thetas,
        dbs,
        theta_step,
        ..
    }) = &mut cfg.experiment
    {
        if let Some(t) = &args.thetas {
            *thetas = t.clone();
        }
        if let Some(d) = &args.dbs {
            *dbs = d.clone();
        }
        if let Some(s) = args.theta_step {
            *theta_step = s;
        }
    }
    let result = experiments::run(&cfg)?;
    let csv = result
        .table
        .as_ref()
        .expect("resolvability runs produce a table")
        .to_csv()?;
    print!("{csv}");
    if cli.verbose > 0 {
        for (k, v) in &result.headline {
            eprintln!("{k} = {v}");
        }
    }
    if let Some(dir) = &cli.out {
        write_artifacts(&result, dir)?;
    }
    Ok(())
}
