//! Command-line front end for the liability equilibrium engine.
//!
//! Every run writes its CSV tables plus `run.manifest.txt` into the output
//! directory. The manifest is itself a configuration file, so
//! `liability --config <dir>/run.manifest.txt <command>` reproduces the run.

pub mod commands;
pub mod config;
pub mod output;

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::Context as _;
use clap::{Args, Parser, Subcommand};

use crate::commands::{run_command, Command, Outcome};
use crate::config::{parse_config, parse_override, ConfigError, RunConfig};

/// Exit status for configuration errors.
pub const EXIT_CONFIG: i32 = 2;
/// Exit status when a solver fails partway through a run.
pub const EXIT_SOLVER: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "liability", version, about = "Equilibria of the AV/HV liability game")]
pub struct Cli {
    /// `key = value` configuration file.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Override one configuration key; repeatable, applied after the file.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE", value_parser = parse_override)]
    pub set: Vec<(String, String)>,

    /// Directory receiving the CSV tables and the run manifest.
    #[arg(long, global = true, default_value = "out", value_name = "DIR")]
    pub out: PathBuf,

    /// Random seed (same as `--set scenario.seed=N`).
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Suppress progress messages on stderr.
    #[arg(long, short, global = true)]
    pub quiet: bool,

    #[command(subcommand)]
    pub command: Cmd,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Equilibrium at a single penetration rate.
    Solve(SolveArgs),
    /// Penetration-rate sweep.
    Sweep(SweepArgs),
    /// Penetration sweeps for several values of one parameter.
    Sensitivity(SensitivityArgs),
    /// Social cost over a k grid plus the lawmaker's descent on k.
    Lawmaker(LawmakerArgs),
    /// Fixed points of AV adoption driven by AV-related loss.
    Endogenous(EndogenousArgs),
    /// Monte Carlo over heterogeneous sensitivity weights.
    Montecarlo(MonteCarloArgs),
    /// Second-order equilibrium conditions over a p grid.
    Check(CheckArgs),
    /// Compare the solvers against brute-force grid enumeration.
    Oracle(OracleArgs),
}

#[derive(Debug, Args)]
pub struct RatioFlags {
    /// Liability ratio: a number or `strategic`.
    #[arg(long)]
    pub k: Option<String>,
    /// Start of the lawmaker descent.
    #[arg(long)]
    pub k0: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub p: Option<f64>,
    #[command(flatten)]
    pub ratio: RatioFlags,
    /// Add pure-AV reference columns.
    #[arg(long)]
    pub pure_av_baseline: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// `start:stop:step`, a comma list or `default`.
    #[arg(long)]
    pub p_grid: Option<String>,
    #[command(flatten)]
    pub ratio: RatioFlags,
    /// `mixed` or `exclusive`.
    #[arg(long)]
    pub lanes: Option<String>,
    #[arg(long)]
    pub pure_av_baseline: bool,
}

#[derive(Debug, Args)]
pub struct SensitivityArgs {
    /// One of alpha, a, h, w_a_sen, w_a_loss.
    #[arg(long)]
    pub parameter: Option<String>,
    /// Comma list of parameter values.
    #[arg(long)]
    pub values: Option<String>,
    #[arg(long)]
    pub p_grid: Option<String>,
    #[command(flatten)]
    pub ratio: RatioFlags,
    #[arg(long)]
    pub pure_av_baseline: bool,
}

#[derive(Debug, Args)]
pub struct LawmakerArgs {
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub k_grid: Option<String>,
    #[arg(long)]
    pub k0: Option<f64>,
}

#[derive(Debug, Args)]
pub struct EndogenousArgs {
    /// Comma list, `narrated` or `table`.
    #[arg(long)]
    pub eta: Option<String>,
    #[command(flatten)]
    pub ratio: RatioFlags,
    /// Further ratios to compare, comma separated.
    #[arg(long)]
    pub k_compare: Option<String>,
    /// Number of interior scan points on (0, 1).
    #[arg(long)]
    pub resolution: Option<usize>,
}

#[derive(Debug, Args)]
pub struct MonteCarloArgs {
    #[arg(long)]
    pub p_grid: Option<String>,
    #[arg(long)]
    pub k: Option<f64>,
    #[arg(long)]
    pub samples: Option<usize>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long)]
    pub p_grid: Option<String>,
    #[command(flatten)]
    pub ratio: RatioFlags,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub k: Option<f64>,
    /// Grid points per axis.
    #[arg(long)]
    pub resolution: Option<usize>,
}

fn push(out: &mut Vec<(String, String)>, key: &str, v: Option<impl ToString>) {
    if let Some(v) = v {
        out.push((key.to_string(), v.to_string()));
    }
}

fn push_ratio(out: &mut Vec<(String, String)>, r: &RatioFlags) {
    push(out, "scenario.k", r.k.as_ref());
    push(out, "scenario.k0", r.k0);
}

fn push_flag(out: &mut Vec<(String, String)>, key: &str, on: bool) {
    if on {
        out.push((key.to_string(), "true".into()));
    }
}

impl Cmd {
    pub fn command(&self) -> Command {
        match self {
            Cmd::Solve(_) => Command::Solve,
            Cmd::Sweep(_) => Command::Sweep,
            Cmd::Sensitivity(_) => Command::Sensitivity,
            Cmd::Lawmaker(_) => Command::Lawmaker,
            Cmd::Endogenous(_) => Command::Endogenous,
            Cmd::Montecarlo(_) => Command::Montecarlo,
            Cmd::Check(_) => Command::Check,
            Cmd::Oracle(_) => Command::Oracle,
        }
    }

    /// Command flags as configuration overrides.
    pub fn overrides(&self) -> Vec<(String, String)> {
        let mut o = Vec::new();
        match self {
            Cmd::Solve(a) => {
                push(&mut o, "scenario.p", a.p);
                push_ratio(&mut o, &a.ratio);
                push_flag(&mut o, "scenario.pure_av_baseline", a.pure_av_baseline);
            }
            Cmd::Sweep(a) => {
                push(&mut o, "scenario.p_grid", a.p_grid.as_ref());
                push_ratio(&mut o, &a.ratio);
                push(&mut o, "scenario.lanes", a.lanes.as_ref());
                push_flag(&mut o, "scenario.pure_av_baseline", a.pure_av_baseline);
            }
            Cmd::Sensitivity(a) => {
                push(&mut o, "scenario.parameter", a.parameter.as_ref());
                push(&mut o, "scenario.values", a.values.as_ref());
                push(&mut o, "scenario.p_grid", a.p_grid.as_ref());
                push_ratio(&mut o, &a.ratio);
                push_flag(&mut o, "scenario.pure_av_baseline", a.pure_av_baseline);
            }
            Cmd::Lawmaker(a) => {
                push(&mut o, "scenario.p", a.p);
                push(&mut o, "scenario.k_grid", a.k_grid.as_ref());
                push(&mut o, "scenario.k0", a.k0);
            }
            Cmd::Endogenous(a) => {
                push(&mut o, "scenario.eta", a.eta.as_ref());
                push_ratio(&mut o, &a.ratio);
                push(&mut o, "scenario.k_compare", a.k_compare.as_ref());
                push(&mut o, "scenario.scan_resolution", a.resolution);
            }
            Cmd::Montecarlo(a) => {
                push(&mut o, "scenario.p_grid", a.p_grid.as_ref());
                push(&mut o, "scenario.k", a.k);
                push(&mut o, "scenario.mc_samples", a.samples);
            }
            Cmd::Check(a) => {
                push(&mut o, "scenario.p_grid", a.p_grid.as_ref());
                push_ratio(&mut o, &a.ratio);
            }
            Cmd::Oracle(a) => {
                push(&mut o, "scenario.p", a.p);
                push(&mut o, "scenario.k", a.k);
                push(&mut o, "scenario.oracle_resolution", a.resolution);
            }
        }
        o
    }
}

/// Resolves the configuration: file, then `--set`, then `--seed`, then
/// command flags.
pub fn resolve_config(cli: &Cli) -> Result<RunConfig, ConfigError> {
    let mut overrides = cli.set.clone();
    push(&mut overrides, "scenario.seed", cli.seed);
    overrides.extend(cli.command.overrides());
    parse_config(cli.config.as_deref(), &overrides)
}

/// Reproducible manifest text for a resolved run.
pub fn manifest(cmd: Command, cfg: &RunConfig) -> String {
    let mut resolved = cfg.clone();
    if resolved.scenario.p_grid.is_none() {
        resolved.scenario.p_grid = Some(cmd.default_p_grid());
    }
    format!(
        "# liability {}\n# command: {}\n# reproduce: liability --config run.manifest.txt {}\n{}",
        env!("CARGO_PKG_VERSION"),
        cmd.name(),
        cmd.name(),
        resolved.to_config_text()
    )
}

fn error_line(kind: &str, command: &str, message: &str) -> String {
    let message = message.replace(['\n', '\r'], " ").replace('"', "'");
    format!("liability-error kind={kind} command={command} message=\"{message}\"")
}

fn write_outputs(dir: &Path, cmd: Command, cfg: &RunConfig, outcome: &Outcome) -> anyhow::Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    for t in &outcome.tables {
        t.write_to(dir).with_context(|| format!("writing {}.csv", t.name))?;
    }
    let path = dir.join("run.manifest.txt");
    fs::write(&path, manifest(cmd, cfg)).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// Runs a parsed command line and returns the process exit status.
pub fn run(cli: Cli) -> i32 {
    let cmd = cli.command.command();
    let cfg = match resolve_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            eprintln!("{}", error_line("config", cmd.name(), &e.to_string()));
            return EXIT_CONFIG;
        }
    };
    let quiet = cli.quiet;
    let mut progress = |msg: &str| {
        if !quiet {
            eprintln!("[{}] {msg}", cmd.name());
        }
    };
    let outcome = run_command(cmd, &cfg, &mut progress);
    if let Err(e) = write_outputs(&cli.out, cmd, &cfg, &outcome) {
        eprintln!("error: {e:#}");
        eprintln!("{}", error_line("io", cmd.name(), &format!("{e:#}")));
        return 1;
    }
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    for line in &outcome.summary {
        let _ = writeln!(lock, "{line}");
    }
    match &outcome.error {
        None => 0,
        Some(e) => {
            let kind = if matches!(e, liability_core::Error::Config(_)) { "config" } else { "solver" };
            eprintln!("error: {e}");
            eprintln!("{}", error_line(kind, cmd.name(), &e.to_string()));
            if kind == "config" {
                EXIT_CONFIG
            } else {
                EXIT_SOLVER
            }
        }
    }
}
