//! Experiment orchestration: configuration, grid tuning on dev rounds,
//! single-pass training, frozen evaluation on test rounds, and reports.

mod config;
mod data;
mod report;
mod runner;

pub use config::{Algorithm, DataSource, ExperimentConfig, Hyper};
pub use data::{Dataset, RepRounds};
pub use report::{
    one_vs_one_matrix, percentile, read_summary_csv, read_trials_csv, summarize, write_summary_csv, write_trials_csv,
    write_win_matrix_csv, SummaryRow, Trial, WinMatrix,
};
pub use runner::{
    build_learner, evaluate, online_pass, prepare, run_experiment, tune_all, tune_grid, write_outputs,
    write_tuning_csv, RunOutput, RunTrace, TuneResult, SUMMARY_FILE, TRACE_DIR, TRIALS_FILE, TUNING_FILE,
    WIN_MATRIX_FILE,
};
