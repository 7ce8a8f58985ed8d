//! Experiment orchestration: per-method acquisition schedules, evaluation,
//! repetitions over seeds and result files.

mod config;
mod report;
mod runner;

pub use config::{ExperimentConfig, GridConfig, GridPoint, Method};
pub use report::{
    aggregate, emit_plot_data, emit_tables, read_plot_data, read_runs, read_runs_csv, write_outputs, write_plot_data,
    write_reports, write_run_log, write_runs, write_summary, AggregateResult, EvalMode, GroupKey, PlotRecord, Stats,
};
pub use runner::{check_accounting, expected_budget, run_method, run_repetitions, ExperimentData, RunOutcome, RunResult};
