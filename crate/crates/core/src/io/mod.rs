//! Configuration ingestion and output formats (legacy VTK, CSV).

pub mod config;
pub mod csv;
pub mod vtk;

pub use config::{parse_config, InitialSpec, OutputConfig, RunConfig, StudyConfig};
