//! Test-case initialisers, run configuration and preset experiments.

mod config;
mod init;
mod run;

pub use config::{Experiment, ExperimentConfig};
pub use init::{
    hydrostatic_exner, init_bubble_column, init_hydrostatic_column, perturb_theta, BubbleShape,
};
pub use run::{
    column_operators, init_bubble_slice, run_column, run_experiment, run_experiment_partial,
    slice_budget, theta_max_height, NamedLedger, RunFailure, RunOutput,
};
