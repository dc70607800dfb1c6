use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use pass_robust_core::experiments::csv::{write_summary, write_traces};
use pass_robust_core::experiments::{
    run_scenario, run_sweep, validate, ScenarioConfig, SweepAxis, ValidationSuite,
};
use serde_json::json;

/// Robust beamforming experiments for pinching-antenna systems.
#[derive(Debug, Parser)]
#[command(name = "pass-robust", version, about)]
struct Cli {
    /// Directory for CSV outputs and the run manifest.
    #[arg(long, global = true, default_value = "results")]
    out: PathBuf,

    /// Overrides the scenario seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Overrides the number of Monte-Carlo trials.
    #[arg(long, global = true)]
    trials: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one scenario and write summary.csv and traces.csv.
    Run {
        /// Scenario file (TOML).
        config: PathBuf,
    },
    /// Run one scenario per value of a swept parameter.
    Sweep {
        /// Scenario file (TOML).
        config: PathBuf,
        /// pt_dbm, delta_bar, epsilon_bar, rho or kappa; defaults to the file's [sweep] table.
        #[arg(long)]
        axis: Option<SweepAxis>,
        /// Comma-separated, ascending values.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        values: Option<Vec<f64>>,
    },
    /// Run a self-check suite: lemma, adversary, socp-oracle or exclusion.
    Validate {
        suite: ValidationSuite,
    },
}

fn load_config(path: &Path, cli: &Cli) -> Result<ScenarioConfig> {
    let mut config = ScenarioConfig::from_file(path)
        .with_context(|| format!("reading scenario {}", path.display()))?;
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(trials) = cli.trials {
        config.trials = trials;
    }
    config.validate().context("invalid scenario")?;
    Ok(config)
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    let path = dir.join(name);
    let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(file))
}

fn write_manifest(dir: &Path, manifest: serde_json::Value) -> Result<()> {
    let writer = create(dir, "manifest.json")?;
    serde_json::to_writer_pretty(writer, &manifest)?;
    Ok(())
}

fn versions() -> serde_json::Value {
    json!({
        "pass-robust": env!("CARGO_PKG_VERSION"),
        "pass-robust-core": pass_robust_core::VERSION,
    })
}

fn execute(cli: &Cli) -> Result<bool> {
    let started = Instant::now();
    match &cli.command {
        Command::Run { config } => {
            let scenario = load_config(config, cli)?;
            fs::create_dir_all(&cli.out)?;
            let run = run_scenario(&scenario)?;
            write_summary(create(&cli.out, "summary.csv")?, &[run.row])?;
            write_traces(create(&cli.out, "traces.csv")?, [&run])?;
            write_manifest(
                &cli.out,
                json!({
                    "command": "run",
                    "config_path": config,
                    "config": scenario,
                    "versions": versions(),
                    "outputs": ["summary.csv", "traces.csv"],
                    "wall_time_s": started.elapsed().as_secs_f64(),
                }),
            )?;
            log::info!("wrote {}", cli.out.display());
            Ok(true)
        }
        Command::Sweep { config, axis, values } => {
            let scenario = load_config(config, cli)?;
            let (axis, values) = match (axis, values, &scenario.sweep) {
                (Some(a), Some(v), _) => (*a, v.clone()),
                (a, v, Some(s)) => (a.unwrap_or(s.axis), v.clone().unwrap_or_else(|| s.values.clone())),
                _ => bail!("sweep needs --axis and --values, or a [sweep] table in the scenario"),
            };
            fs::create_dir_all(&cli.out)?;
            let result = run_sweep(&scenario, axis, &values)?;
            let summary = format!("sweep_{axis}.csv");
            write_summary(create(&cli.out, &summary)?, &result.rows())?;
            write_traces(create(&cli.out, "traces.csv")?, &result.runs)?;
            write_manifest(
                &cli.out,
                json!({
                    "command": "sweep",
                    "config_path": config,
                    "config": scenario,
                    "axis": axis,
                    "values": values,
                    "versions": versions(),
                    "outputs": [summary, "traces.csv"],
                    "wall_time_s": started.elapsed().as_secs_f64(),
                }),
            )?;
            log::info!("wrote {}", cli.out.display());
            Ok(true)
        }
        Command::Validate { suite } => {
            let seed = cli.seed.unwrap_or(1);
            let report = validate(*suite, seed)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(report.passed())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
