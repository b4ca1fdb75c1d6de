//! Experiment harness: configuration, timed runs, result tables, field dumps and scaling fits.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod experiment;
pub mod output;
pub mod scaling;

pub use config::{ExperimentConfig, Mode, Overrides};
pub use error::{CliError, Result};
pub use experiment::{oracle_check, run_case, run_experiment, OracleReport, RunOutcome};
pub use output::{dump_field, dump_solution, read_csv, read_field, write_csv, FieldMeta, ResultRow};
pub use scaling::{scaling_summary, Fit, ScalingSummary};

/// Pin the global worker pool; later calls after the pool exists are ignored.
pub fn init_threads(threads: Option<usize>) {
    if let Some(t) = threads {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
}
