//! Experiment driver: configuration, UE drops, the M-sweep, output files
//! and the randomized invariant suite.

pub mod check;
pub mod config;
pub mod drop;
pub mod output;
pub mod run;

pub use check::{run_checks, CheckOutcome, CheckReport};
pub use config::{validate_config, ExperimentConfig, GeometrySpec};
pub use drop::{bs_grid, drop_ues, DropSetup};
pub use output::{format_sig9, plot_script, summary_table, to_csv, write_outputs, CSV_HEADER};
pub use run::{evaluate_point, run_experiment, DropRecord, ExperimentResult, ResultRow};
