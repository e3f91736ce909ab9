//! Run configuration, presets, ensembles and result files.

pub mod config;
pub mod output;
pub mod presets;
pub mod runner;

pub use config::{load_config, parse_config, InitialDatum, Mode, OutputConfig, RunConfig};
pub use output::{emit_results, emit_sweep};
pub use presets::{preset, PRESETS};
pub use runner::{run_ensemble, run_fp, run_single, sweep, EnsembleResult, RunSummary, SweepPoint};
