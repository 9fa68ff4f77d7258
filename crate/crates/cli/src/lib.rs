//! Command implementations behind the `maslovflow` binary. Each command takes
//! a validated [`config::ProblemConfig`] and returns a JSON-serializable
//! [`commands::Report`].

pub mod commands;
pub mod config;

pub use commands::{cmd_maslov, cmd_sflow, cmd_spectra, cmd_verify, CommandError, Identity, Report};
pub use config::{ConfigError, Overrides, ProblemConfig};
