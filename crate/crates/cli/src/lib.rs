//! File formats, configuration and the command-line pipeline around
//! `cueval-core`: generate a dataset, label it, compute metric series,
//! evaluate them and render reports.

pub mod config;
pub mod dataset;
pub mod error;
pub mod pipeline;
pub mod svg;
pub mod tables;

pub use config::RunConfig;
pub use dataset::Dataset;
pub use error::{CliError, Result};
