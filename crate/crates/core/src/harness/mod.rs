//! Monte Carlo experiment driver: configuration, paired trials, aggregation
//! and result files.

mod config;
mod output;
mod run;

pub use config::{BsSpec, ExperimentConfig, MsSpec, OutputSpec, PowerSpec};
pub use output::{emit_results, read_results_json, OutputFormat, ResultRow};
pub use run::{aggregate, run_experiment, run_trials, trial_seed, AggregateResult, AggregateRow, SchemeSummary, TrialRecord};
