//! Command-line front end for QIPF moments, QIPF-OT dependence and the
//! two-moon and equitability experiments.
//!
//! Exit codes: 0 success, 1 output write failure, 2 usage or input error,
//! 3 degenerate data, 4 non-convergence under `--strict`.

pub mod args;
pub mod commands;
pub mod failure;
pub mod input;
pub mod manifest;
pub mod svg;

use args::{Cli, Command, ExperimentCommand};
use failure::CliResult;

pub fn run(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Qipf(a) => commands::qipf(a),
        Command::Depend(a) => commands::depend(a),
        Command::Experiment(ExperimentCommand::TwoMoon(a)) => commands::two_moon(a),
        Command::Experiment(ExperimentCommand::Equitability(a)) => commands::equitability(a),
    }
}
