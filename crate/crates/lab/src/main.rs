use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use meanfield_lab::{run, ExperimentConfig, RunContext};

#[derive(Parser)]
#[command(name = "meanfield-lab", version, about = "Mean-field limit experiments for trapped 2D bosons")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    Converge(Common),
    EnergyCheck(Common),
    LewinCheck(Common),
    HartreeScan(Common),
    Definetti(Common),
    Counterexample(Common),
    TraceIdentity(Common),
    NlsEvolve(Common),
    ManybodyEvolve(Common),
    GnConstant(Common),
}

#[derive(Args)]
struct Common {
    /// JSON experiment configuration
    #[arg(long)]
    config: PathBuf,
    /// Directory for report.json and data files
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the seed of stochastic experiments
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; 1 gives byte-identical reruns
    #[arg(long)]
    threads: Option<usize>,
}

impl Command {
    fn split(&self) -> (&'static str, &Common) {
        match self {
            Command::Converge(c) => ("converge", c),
            Command::EnergyCheck(c) => ("energy-check", c),
            Command::LewinCheck(c) => ("lewin-check", c),
            Command::HartreeScan(c) => ("hartree-scan", c),
            Command::Definetti(c) => ("definetti", c),
            Command::Counterexample(c) => ("counterexample", c),
            Command::TraceIdentity(c) => ("trace-identity", c),
            Command::NlsEvolve(c) => ("nls-evolve", c),
            Command::ManybodyEvolve(c) => ("manybody-evolve", c),
            Command::GnConstant(c) => ("gn-constant", c),
        }
    }
}

fn execute(cli: Cli) -> Result<bool> {
    let (name, args) = cli.command.split();
    if let Some(n) = args.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("cannot size the thread pool")?;
    }
    let text = std::fs::read_to_string(&args.config).with_context(|| format!("cannot read {}", args.config.display()))?;
    let mut config = ExperimentConfig::from_json(&text)?;
    if config.name() != name {
        bail!("subcommand {name} does not match the config experiment {}", config.name());
    }
    if let Some(seed) = args.seed {
        match config.seed_mut() {
            Some(slot) => *slot = Some(seed),
            None => log::warn!("{name} is deterministic; --seed ignored"),
        }
    }
    if let Some(dir) = &args.out {
        meanfield_lab::runner::prepare_out_dir(dir)?;
    }
    let ctx = RunContext { out_dir: args.out.clone(), cache_dir: meanfield_core::manybody::cache::cache_dir_from_env() };
    let report = run(&config, &ctx)?;
    for c in &report.verdicts {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    eprintln!("wall time {:.2} s", report.wall_time_seconds);
    match &args.out {
        Some(dir) => report.write(dir)?,
        None => println!("{}", serde_json::to_string_pretty(&report)?),
    }
    Ok(report.passed())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
    }
}
