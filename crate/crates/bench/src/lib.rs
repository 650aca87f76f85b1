//! Experiment harness for `pinn-core`: presets, runs, checkpoints, heatmaps
//! and comparison reports.

pub mod checkpoint;
pub mod config;
pub mod error;
pub mod heatmap;
pub mod presets;
pub mod report;
pub mod run;
pub mod verify;

pub use config::{ExperimentConfig, NetSizing};
pub use error::{BenchError, Result};
