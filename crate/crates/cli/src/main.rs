//! Command-line runner for the fockchaos experiments.

mod config;
mod error;
mod experiments;
mod output;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use config::Experiment;
use error::CliError;
use output::RunRecord;

#[derive(Parser)]
#[command(name = "fockchaos", version, about = "Quantum chaos experiments on Bose-Hubbard lattices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Return probability of a coherent state, exact and truncated Wigner.
    Autocorr(RunArgs),
    /// Coherent backscattering in Fock space versus gauge phase.
    Cbs(RunArgs),
    /// Exact versus semiclassical eigenstate covariance.
    Rwm(RunArgs),
    /// Out-of-time-order correlator of occupation operators.
    Otoc(RunArgs),
    /// Level spacings and spectral form factor of a disordered ensemble.
    Spectra(RunArgs),
    /// Largest mean-field Lyapunov exponent.
    Lyapunov(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Overrides the seed in the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads, 0 for one per core.
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Only validate the configuration and report problems.
    #[arg(long)]
    validate_only: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (experiment, args) = match cli.command {
        Command::Autocorr(a) => (Experiment::Autocorr, a),
        Command::Cbs(a) => (Experiment::Cbs, a),
        Command::Rwm(a) => (Experiment::Rwm, a),
        Command::Otoc(a) => (Experiment::Otoc, a),
        Command::Spectra(a) => (Experiment::Spectra, a),
        Command::Lyapunov(a) => (Experiment::Lyapunov, a),
    };
    match execute(experiment, &args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(experiment: Experiment, args: &RunArgs) -> Result<(), CliError> {
    let text = fs::read_to_string(&args.config)
        .map_err(|source| CliError::Read { path: args.config.clone(), source })?;
    if args.validate_only {
        let issues = config::validate(&text, experiment)?;
        if !issues.is_empty() {
            return Err(CliError::Invalid(issues));
        }
        println!("{}: configuration is valid", experiment.name());
        return Ok(());
    }
    let cfg = config::load(&text, experiment, args.seed)?;
    if args.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(args.threads)
            .build_global()
            .map_err(|e| CliError::Threads(e.to_string()))?;
    }
    let start = Instant::now();
    let outcome = experiments::run(&cfg)?;
    let record = RunRecord {
        experiment: cfg.experiment.name(),
        canonical_config: &cfg.canonical,
        seed: cfg.seed,
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    for warning in &outcome.warnings {
        eprintln!("warning: {warning}");
    }
    for path in output::write_outputs(&args.out, &record, &outcome)? {
        println!("wrote {}", path.display());
    }
    Ok(())
}
