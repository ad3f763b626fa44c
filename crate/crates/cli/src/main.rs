//! `mevlab`: run local-MEV, interference and property analyses on scenario
//! files.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use commands::{CliError, Outcome};

#[derive(Debug, Parser)]
#[command(name = "mevlab", version, about = "Local MEV and MEV interference of smart-contract scenarios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Replay the scenario's transactions and print each intermediate state.
    Exec(Common),
    /// Restricted and unrestricted local MEV of the analysis targets.
    Mev(Common),
    /// Interference of the context on the new contracts.
    Interference(Common),
    /// Check the compositionality properties on the scenario.
    Properties(PropertiesArgs),
    /// Set search results against the closed forms.
    OracleCompare(Common),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Exact,
    Heuristic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Scenario file.
    pub scenario: PathBuf,
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    /// Seed for randomised parts; defaults to the scenario's, else 0.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    #[arg(long)]
    pub max_states: Option<usize>,
    #[arg(long)]
    pub depth: Option<usize>,
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    pub beam: Option<usize>,
    /// Format written to standard output.
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Also write the JSON report to this file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PropertiesArgs {
    #[command(flatten)]
    pub common: Common,
    /// Also run the randomised suites with this many generated cases.
    #[arg(long)]
    pub suite: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Exec(c) => commands::run("exec", c, None),
        Command::Mev(c) => commands::run("mev", c, None),
        Command::Interference(c) => commands::run("interference", c, None),
        Command::Properties(p) => commands::run("properties", &p.common, p.suite),
        Command::OracleCompare(c) => commands::run("oracle-compare", c, None),
    };
    match result {
        Ok(Outcome { violated }) => ExitCode::from(if violated { 4 } else { 0 }),
        Err(e) => {
            eprintln!("mevlab: {e}");
            ExitCode::from(match e {
                CliError::Scenario(_) => 2,
                CliError::Engine(_) | CliError::Oracle(_) => 3,
                CliError::Io { .. } | CliError::Workers(_) => 1,
            })
        }
    }
}
