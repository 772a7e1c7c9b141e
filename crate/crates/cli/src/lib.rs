//! Command-line front end: model catalog, single tube estimates and the
//! battery, driven by a `key = value` configuration file and flags.

pub mod commands;
pub mod config;
pub mod error;

pub use commands::{cmd_battery, cmd_models, cmd_smallball, Outcome};
pub use config::{RawConfig, RunConfig};
pub use error::CliError;
