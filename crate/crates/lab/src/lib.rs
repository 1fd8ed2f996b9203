//! Batch front end for `renorm-core`: configuration, report files, a tuning
//! cache and the subcommands behind the `renorm` binary.

pub mod cache;
pub mod commands;
pub mod config;
pub mod error;
pub mod formats;
pub mod report;
pub mod words;

pub use commands::{execute, run, Command, Outcome, RunStatus};
pub use config::RunConfig;
pub use error::{LabError, LabResult};
