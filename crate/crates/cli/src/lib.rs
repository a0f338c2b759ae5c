//! Experiment runner for amplitude-perturbation augmentation.
//!
//! Exit status of the `ampaug` binary: [`EXIT_OK`] on success,
//! [`EXIT_CONFIG`] for invalid flags, settings or config files (nothing is
//! computed), and [`EXIT_RUNTIME`] for failures while loading data,
//! training or writing outputs.

pub mod cli;
pub mod commands;
pub mod config;
pub mod pipeline;
pub mod svg;

use ampaug::Error;
use cli::{Cli, Command};
use config::Settings;

pub const EXIT_OK: u8 = 0;
pub const EXIT_RUNTIME: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;

pub fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Config(_) => EXIT_CONFIG,
        _ => EXIT_RUNTIME,
    }
}

/// Resolves settings for `cli` and runs its command, returning the text
/// summary to print.
pub fn run(cli: &Cli) -> ampaug::Result<String> {
    let settings = Settings::resolve(cli.command.common().config.as_deref(), &cli.command.flags())?;
    Ok(match &cli.command {
        Command::Synth(_) => commands::cmd_synth(&settings)?.to_string(),
        Command::Augment(_) => commands::cmd_augment(&settings)?.to_string(),
        Command::Train(_) => commands::cmd_train(&settings)?.to_string(),
        Command::Sweep(_) => commands::cmd_sweep(&settings)?.to_string(),
        Command::Eval(_) => commands::cmd_eval(&settings)?.to_string(),
    })
}
