//! `hairopt` — capacitive hair-sensor design exploration.
//!
//! Exit codes: 0 success, 2 config/schema errors (and unreadable inputs),
//! 3 computation errors. Every failure writes a single-line JSON error to
//! stderr.

use clap::{Args, Parser, Subcommand, ValueEnum};
use hairopt::commands::{cmd_metrics, cmd_report, cmd_sweep, cmd_tune, CommandError};
use hairopt::config::parse_config;
use hairopt::optimizer::Objective;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "hairopt", version, about = "Capacitive hair-flow-sensor design exploration")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Metrics (C, dC/dalpha, kappa) of the configured electrode as JSON.
    Metrics(CommonArgs),
    /// Electrode-less length sweep as CSV.
    Sweep(CommonArgs),
    /// Flat/curved/reduced comparison report as JSON plus a human table.
    Report(CommonArgs),
    /// Bias sweep (S_eff, omega_eff) as CSV; requires tuning parameters.
    Tune(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Write the primary output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Optimization target for the reduced-electrode report row.
    #[arg(long, value_enum, default_value_t = ObjectiveArg::Sensitivity)]
    objective: ObjectiveArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum ObjectiveArg {
    Sensitivity,
    Kappa,
}

impl From<ObjectiveArg> for Objective {
    fn from(arg: ObjectiveArg) -> Self {
        match arg {
            ObjectiveArg::Sensitivity => Objective::Sensitivity,
            ObjectiveArg::Kappa => Objective::Kappa,
        }
    }
}

enum Failure {
    Command(CommandError),
    Io(String),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Command(e) => e.exit_code() as u8,
            Failure::Io(_) => 2,
        }
    }

    fn to_json(&self) -> String {
        match self {
            Failure::Command(e) => e.to_json(),
            Failure::Io(msg) => {
                serde_json::json!({ "error": "io", "message": msg }).to_string()
            }
        }
    }
}

impl From<CommandError> for Failure {
    fn from(e: CommandError) -> Self {
        Failure::Command(e)
    }
}

fn read_config(path: &Path) -> Result<hairopt::RunConfig, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Io(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text).map_err(|e| Failure::Command(e.into()))
}

fn emit(primary: &str, out: &Option<PathBuf>) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, primary)
            .map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{primary}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Metrics(args) => {
            let cfg = read_config(&args.config)?;
            emit(&cmd_metrics(&cfg)?, &args.out)
        }
        Command::Sweep(args) => {
            let cfg = read_config(&args.config)?;
            emit(&cmd_sweep(&cfg)?, &args.out)
        }
        Command::Report(args) => {
            let cfg = read_config(&args.config)?;
            let (doc, table) = cmd_report(&cfg, args.objective.into())?;
            emit(&doc, &args.out)?;
            // keep stdout machine-parseable: the table goes to stdout only
            // when the JSON went to a file
            if args.out.is_some() {
                print!("{table}");
            } else {
                eprint!("{table}");
            }
            Ok(())
        }
        Command::Tune(args) => {
            let cfg = read_config(&args.config)?;
            let (csv, warnings) = cmd_tune(&cfg)?;
            emit(&csv, &args.out)?;
            for w in warnings {
                eprintln!("{w}");
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("{}", failure.to_json());
            ExitCode::from(failure.exit_code())
        }
    }
}
