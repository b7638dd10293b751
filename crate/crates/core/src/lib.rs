//! Weakly-supervised route segmentation for a scanning ground radar.
//!
//! A simulated robot drives over a synthetic world, listening to its wheels.
//! An audio classifier labels the terrain under the robot, a Kalman filter
//! fuses odometry with GPS, and the audio labels are painted into radar
//! scans. Those sparse labels train a U-Net that segments drivable paths.

pub mod audio;
pub mod canvas;
pub mod dsp;
pub mod error;
pub mod eval;
pub mod fusion;
pub mod geometry;
pub mod io;
pub mod numeric;
pub mod pipeline;
pub mod rng;
pub mod segmentation;
pub mod simworld;
pub mod terrain;

pub use error::{Error, Result};
pub use geometry::Pose2;
pub use terrain::TerrainClass;
