//! Fusion of visual odometry with GPS, and terrain labels along the fused path.

pub mod ekf;
pub mod label;
pub mod types;

pub use ekf::{ekf_predict, ekf_update, fuse, EkfConfig, EkfState, FusedPose};
pub use label::{label_trajectory, LabeledTrajectory, ASSOCIATION_WINDOW};
pub use types::{GpsFix, LabeledPose, TerrainPrediction, VoIncrement};
