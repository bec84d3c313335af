//! Run configuration, NDJSON diagnostics and binary checkpoints.

pub mod checkpoint;
pub mod config;
pub mod records;
pub mod run;

pub use config::{load_config, parse_config, Mode, RunConfig};
pub use run::{run, run_to_writer, RunOutcome};
