//! File formats, pipeline configuration and the `arclust` command line.

pub mod app;
pub mod config;
pub mod error;
pub mod grid;
pub mod io;

pub use error::{CliError, Result};
