//! Monte Carlo harness around the `ris-uamp` estimators: configuration,
//! seeded trial generation, parallel sweeps and CSV output.

pub mod config;
mod error;
pub mod output;
pub mod presets;
pub mod runner;

pub use config::{EstimatorKind, ExperimentConfig, GridPoint};
pub use error::{ExperimentError, Result};
pub use output::{emit_csv, write_csv, CsvLayout};
pub use ris_uamp::metrics::nmse_with_ambiguity_removal;
pub use runner::{median, run_monte_carlo, run_trial, trial_seed, EstimatorOutcome, TrialRecord};
