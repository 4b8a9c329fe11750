//! Experiment driver: JSON configs, seeded runs with regret traces, sweeps
//! and the validation battery.

mod config;
mod run;
mod sweep;
pub mod validate;

pub use config::{Algorithm, BehaviorSpec, ExperimentConfig, OutputSpec, ThetaSpec};
pub use run::{
    cumulative_from_csv, run, run_replicates, theta_for, EpochLog, RegretTrace, RoundOutcome, RunOutput, CSV_HEADER,
    MEMBERSHIP_TOL,
};
pub use sweep::{summary_csv, sweep, Grid, SummaryRow, SweepSpec};
pub use validate::{acceptance, battery, Check, Scale};
