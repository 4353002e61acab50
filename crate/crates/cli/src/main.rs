use std::io::Write;
use std::num::NonZeroUsize;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use rydberg_dress::validate::Fault;
use rydberg_dress_cli::commands::{self, Invocation};
use rydberg_dress_cli::config::ScenarioChoice;
use rydberg_dress_cli::{CliError, CliResult, Failure, Format, PresetName, RunConfig};

/// Hyperfine-resolved RF dressing and EIT spectra of a Rydberg ladder.
///
/// Exit status: 0 ok, 1 validation failure, 2 configuration error,
/// 3 numerical contract violation, 4 solver failure.
#[derive(Parser, Debug)]
#[command(name = "rydberg-dress", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML run configuration.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Scenario preset; overrides the configuration file.
    #[arg(long, global = true, value_enum)]
    preset: Option<PresetName>,

    /// Output file; standard output when absent.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Worker threads for the spectrum scan.
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<NonZeroUsize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Count the dipole couplings of each field.
    Transitions {
        /// List every coupling.
        #[arg(long)]
        list: bool,
    },
    /// Diagonalize the RF-dressed Rydberg pair.
    Dress,
    /// Probe transmission versus coupling detuning.
    Spectrum,
    /// Export the transition diagram.
    Diagram,
    /// Run the oracle checks.
    Validate {
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
    /// Print the effective configuration.
    Config,
}

fn invocation(cli: &Cli) -> CliResult<Invocation> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(p) = cli.preset {
        config.scenario = ScenarioChoice::Preset(p.as_str().into());
    }
    config.validate()?;
    let mut inv = Invocation::new(config);
    if cli.out.is_some() {
        inv.out = cli.out.clone();
    }
    if cli.format.is_some() {
        inv.format = cli.format;
    }
    inv.jobs = cli.jobs.map(NonZeroUsize::get);
    Ok(inv)
}

fn run(cli: &Cli) -> CliResult<commands::Outcome> {
    let inv = invocation(cli)?;
    match cli.command {
        Command::Transitions { list } => commands::transitions(&inv, list),
        Command::Dress => commands::dress(&inv),
        Command::Spectrum => commands::spectrum(&inv),
        Command::Diagram => commands::diagram(&inv),
        Command::Validate { inject_fault } => commands::validate(&inv, inject_fault.then_some(Fault::RfBlockSign)),
        Command::Config => commands::show_config(&inv),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(outcome) => {
            let mut stdout = std::io::stdout().lock();
            let _ = stdout.write_all(outcome.stdout.as_bytes());
            if outcome.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(Failure::Validation as u8)
            }
        }
        Err(CliError { failure, message }) => {
            eprintln!("rydberg-dress: {message}");
            ExitCode::from(failure as u8)
        }
    }
}
