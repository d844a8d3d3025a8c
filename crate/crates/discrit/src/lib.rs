//! Std companion of `discrit-core`: artifact formats, experiment
//! configuration and the pipeline behind the `discrit` binary.

pub mod config;
pub mod io;
pub mod pipeline;

pub use config::{ExperimentConfig, Overrides};
pub use pipeline::{run_pipeline, Manifest};
