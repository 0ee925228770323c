//! Library side of the `minimax-lab` binary: configuration, builtin
//! fixtures, command dispatch and report rendering.

pub mod builtins;
pub mod config;
pub mod report;
pub mod run;

pub use config::{load_config, load_str, Command, ConfigError, RunConfig};
pub use run::{execute, Outcome, Status};
