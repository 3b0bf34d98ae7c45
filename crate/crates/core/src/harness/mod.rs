//! Experiment driver: configuration files, seeded sweeps, worker pools and
//! CSV output.

pub mod config;
pub mod csv;
pub mod sweep;

pub use config::{parse_config, parse_sweep, Experiment, ParsedConfig, SweepSpec};
pub use csv::{emit_csv, emit_csv_with, CsvOptions};
pub use sweep::{cell_seed, run_experiment, run_sweep, with_workers, worker_count, CellOutcome};
