//! Experiment runner for `lumplab-core`: configuration, catalogue, file formats and the invariant suite.

pub mod catalogue;
pub mod config;
pub mod error;
pub mod experiments;
pub mod io;
pub mod verify;

pub use config::ExperimentConfig;
pub use error::{Error, Result};
