//! Configuration, orchestration and report emission for the `plap` binary.

pub mod commands;
pub mod config;
pub mod output;

pub use commands::{run_subcommand, CliError, Command, Outcome, RunOptions, Status};
pub use config::{parse_config, parse_config_str, resolve_output_dir, LoadedConfig, RunConfig};
