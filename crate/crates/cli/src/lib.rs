//! Batch runner behind the `hypequil` binary: config parsing, task execution
//! and artifact writing.

pub mod config;
pub mod error;
pub mod plot;
pub mod run;

pub use config::{parse_config, ExperimentConfig, Task};
pub use error::{CliError, Result};
pub use run::{run_task, TaskReport};
