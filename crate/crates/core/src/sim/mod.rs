//! Batch experiments: config, Monte Carlo runner, CSV output and CLI.

pub mod cli;
pub mod config;
pub mod csv;
pub mod run;

pub use cli::{cli_main, cli_main_with};
pub use config::{ExperimentSpec, Waveform};
pub use csv::{to_csv_string, write_csv, HEADER};
pub use run::{bounds_only, run_experiment, run_experiment_with_workers, ResultRow};
