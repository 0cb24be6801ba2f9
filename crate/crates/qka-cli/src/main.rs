//! Scenario runner for the key agreement simulations.
//!
//! Exit codes: 0 success, 1 usage error, 2 assertion failure in a
//! verification command (`table2`, `efficiency`, `audit`).

mod attack;
mod commands;
mod report;

use clap::error::ErrorKind;
use clap::Parser;

use commands::{cmd_audit, cmd_efficiency, cmd_run, cmd_table2};

#[derive(Parser, Debug)]
#[command(
    name = "qka",
    version,
    about = "Simulate Bell-state quantum key agreement protocols, attacks, and efficiency"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Subcommand, Debug)]
enum Command {
    /// Run seeded protocol trials under a configurable attack model.
    Run(commands::RunArgs),
    /// Enumerate all 16 encoding pairs on Φ⁺ and verify the state table.
    Table2(commands::Table2Args),
    /// Print the efficiency comparison and the generalized coefficient.
    Efficiency(commands::EfficiencyArgs),
    /// Replay a flaw demonstration and the matching defense side by side.
    Audit(commands::AuditArgs),
}

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return code;
        }
    };
    let outcome = match &cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Table2(args) => cmd_table2(args),
        Command::Efficiency(args) => cmd_efficiency(args),
        Command::Audit(args) => cmd_audit(args),
    };
    match outcome {
        Ok(code) => code,
        Err(usage) => {
            eprintln!("error: {}", usage.0);
            1
        }
    }
}
