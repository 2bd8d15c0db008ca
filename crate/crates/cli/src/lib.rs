//! Experiment harness for the `htis-core` estimators: configuration files,
//! reproducible parallel runs over estimator × (n, b) grids, threshold
//! sweeps and table/CSV/JSON reports.

pub mod config;
pub mod report;
pub mod runner;
pub mod seeds;
pub mod sweep;

pub use config::{ExperimentConfig, Format};
pub use runner::{run_experiment, Report, RunOptions};
pub use sweep::{run_efficiency_sweep, SweepConfig, SweepReport};
