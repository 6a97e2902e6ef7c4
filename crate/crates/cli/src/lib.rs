//! Experiment runner: structured configs in, CSV spectra / sweep tables
//! / portable-graymap images out, with scenario presets reproducing the
//! reference measurements at desk scale.

pub mod config;
pub mod error;
pub mod output;
pub mod presets;
pub mod scenario;

pub use config::ExperimentConfig;
pub use error::CliError;
pub use output::RunManifest;
pub use scenario::{ranging_protocol, run_match, run_scenario, run_sweep};
