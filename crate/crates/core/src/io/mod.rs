//! Run descriptions, task dispatch and output serialization.

pub mod config;
pub mod run;

pub use config::{parse_config, BcSpec, ConfigError, OutputFormat, RunConfig, SpectralRange, Task};
pub use run::{compute, run, write_artifacts, Artifact, Cell, RunOutcome, Table};
