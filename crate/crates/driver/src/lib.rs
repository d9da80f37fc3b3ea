//! Configuration, snapshot I/O and run orchestration behind the `sqg` binary.

pub mod config;
pub mod error;
pub mod run;
pub mod snapshot;

pub use config::{parse_config, RunConfig};
pub use error::{ConfigError, DriverError, Result};
pub use run::{run, RunOptions, RunSummary};
pub use snapshot::Snapshot;
