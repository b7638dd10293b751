//! Scan geometry and painting of trajectory labels into radar scans.

pub mod paint;
pub mod polar;
pub mod rds;

pub use paint::{mask_stats, paint_labels, Label, LabelMask, MaskStats, FOOTPRINT_RADIUS};
pub use polar::{polar_to_cartesian, polar_to_cartesian_rotated, CartesianScan, PolarScan, RadarProfile, ScanGeometry, AZIMUTHS};
pub use rds::{read_rds, write_rds};
