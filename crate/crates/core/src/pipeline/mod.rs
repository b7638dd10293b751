//! End-to-end pipeline: simulation, audio labels, fusion, painting and the
//! segmentation curriculum.

pub mod config;
pub mod files;
pub mod render;
pub mod reproduce;
pub mod stages;
pub mod world;

pub use config::PipelineConfig;
pub use reproduce::{reproduce, write_manifest, Gate, Report, Timing};
pub use world::{assemble_world, effective_footprint, paint_run, process_run, ProcessedWorld};
