//! Experiment driver for `virasoro-core`: configuration loading and the
//! commands behind the `vbott` binary.

pub mod commands;
pub mod config;

pub use commands::{run, Check, Command, Outcome};
pub use config::Config;
