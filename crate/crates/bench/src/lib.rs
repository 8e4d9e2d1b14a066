//! Command-line benchmark harness for the lasso solvers in `ppa-core`.

pub mod cli;
pub mod commands;
pub mod error;
pub mod output;

use ppa_core::StrategyRegistry;

use cli::{Cli, Command};
pub use error::BenchError;

pub fn run(cli: &Cli) -> Result<(), BenchError> {
    let registry = StrategyRegistry::with_builtins();
    match &cli.command {
        Command::Gen(args) => commands::cmd_gen(args),
        Command::Solve(args) => commands::cmd_solve(args, &registry).map(|_| ()),
        Command::Sweep(args) => commands::cmd_sweep(args, &registry).map(|_| ()),
        Command::Compare(args) => commands::cmd_compare(args, &registry).map(|_| ()),
        Command::Trace(args) => commands::cmd_trace(args, &registry),
    }
}
