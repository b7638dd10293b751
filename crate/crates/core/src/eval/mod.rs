//! Segmentation metrics and comparison tables.

pub mod metrics;
pub mod table;

pub use metrics::{confusion, iou, pixel_accuracy, region_report, Confusion, SegScores};
pub use table::{compare_table, ScoreTable};
