//! `simpeval`: score simplification corpora, correlate metrics with human
//! ratings, and audit QuestEval question by question.

mod audit;
mod backend;
mod correlate;
mod error;
mod fixtures;
mod plot;
mod questeval_args;
mod score;

use std::process::ExitCode;

use clap::{Parser, Subcommand};
use tracing_subscriber::EnvFilter;

use error::{CliError, EXIT_OK, EXIT_USAGE};

#[derive(Debug, Parser)]
#[command(
    name = "simpeval",
    version,
    about = "Evaluate sentence simplification metrics against human judgements"
)]
struct Cli {
    /// Log more (repeat for debug output); RUST_LOG overrides
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Score every instance with the selected metrics
    Score(score::ScoreArgs),
    /// Correlate metric scores with mean human ratings
    Correlate(correlate::CorrelateArgs),
    /// Show generated questions, both answers and both similarities
    #[command(name = "audit-questeval")]
    AuditQuestEval(audit::AuditArgs),
    /// Work with record/replay fixture stores
    #[command(subcommand)]
    Fixtures(fixtures::FixturesCommand),
}

fn init_logging(verbose: u8) {
    let default = match verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let filter = EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new(default));
    let _ = tracing_subscriber::fmt()
        .with_env_filter(filter)
        .with_writer(std::io::stderr)
        .try_init();
}

fn exit(code: i32) -> ExitCode {
    ExitCode::from(code as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return exit(if e.use_stderr() { EXIT_USAGE } else { EXIT_OK });
        }
    };
    init_logging(cli.verbose);
    let result: Result<i32, CliError> = match &cli.command {
        Command::Score(args) => score::run(args),
        Command::Correlate(args) => correlate::run(args),
        Command::AuditQuestEval(args) => audit::run(args),
        Command::Fixtures(cmd) => fixtures::run(cmd),
    };
    match result {
        Ok(code) => exit(code),
        Err(e) => {
            eprintln!("simpeval: {e}");
            exit(e.exit_code())
        }
    }
}
