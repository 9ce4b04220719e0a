//! File formats, parallel sweeps and the command-line front end for
//! `eehc-core`.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod parallel;

pub use commands::run;
pub use config::{parse_config, Command, Overrides, RunConfig, SimSettings, SweepSource};
pub use error::LabError;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
