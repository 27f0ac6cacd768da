use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use heom_cli::{parse_values, run, CliError, Command, RunSpec};

/// Two-level system in a Drude bath and a stochastic field.
#[derive(Debug, Parser)]
#[command(name = "heom", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// CSV destination; standard output when omitted.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,

    /// Override a configuration key, e.g. `--set bath.beta=0.2`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,

    /// Worker threads for parallel sections.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Master seed for Monte Carlo runs.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Hierarchy depth for both coupling modes.
    #[arg(long, global = true)]
    depth: Option<usize>,

    /// Only report errors.
    #[arg(long, short, global = true)]
    quiet: bool,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Population and coherence trajectories (RWA, full, Markovian).
    Evolve,
    /// Stationary states.
    Steady,
    /// Normalized emission spectra.
    Spectrum,
    /// Steady-state population along one parameter axis.
    Sweep {
        /// Parameter path, e.g. `field.gamma_common` or `bath.beta`.
        #[arg(long)]
        axis: String,
        /// `start:stop:count` or a comma-separated list.
        #[arg(long)]
        values: String,
    },
    /// Monte Carlo average over sampled field trajectories.
    Mc,
    /// Markovian master equation alone.
    Lindblad,
}

fn spec_from(cli: Cli) -> Result<RunSpec, CliError> {
    let command = match cli.command {
        Cmd::Evolve => Command::Evolve,
        Cmd::Steady => Command::Steady,
        Cmd::Spectrum => Command::Spectrum,
        Cmd::Sweep { axis, values } => Command::Sweep { axis, values: parse_values(&values)? },
        Cmd::Mc => Command::Mc,
        Cmd::Lindblad => Command::Lindblad,
    };
    Ok(RunSpec {
        command,
        config: cli.config,
        output: cli.output,
        overrides: cli.overrides,
        threads: cli.threads,
        seed: cli.seed,
        depth: cli.depth,
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.quiet { "error" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match spec_from(cli).and_then(|spec| run(&spec)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.category());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
