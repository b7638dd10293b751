use serde::{Deserialize, Serialize};

use crate::terrain::TerrainClass;

/// Body-frame motion between two consecutive odometry timestamps.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VoIncrement {
    pub timestamp: f64,
    pub dx: f64,
    pub dy: f64,
    pub dyaw: f64,
}

/// Global position fix with isotropic standard deviation `sigma`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GpsFix {
    pub timestamp: f64,
    pub x: f64,
    pub y: f64,
    pub sigma: f64,
}

/// Classifier output for one audio window, stamped at the window centre.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TerrainPrediction {
    pub timestamp: f64,
    pub terrain: TerrainClass,
    /// Class probabilities in `TerrainClass::ALL` order.
    pub probabilities: [f64; TerrainClass::COUNT],
}

impl TerrainPrediction {
    pub fn confidence(&self) -> f64 {
        self.probabilities[self.terrain.index()]
    }
}

/// Fused pose on the trajectory with a terrain label.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabeledPose {
    pub timestamp: f64,
    pub x: f64,
    pub y: f64,
    pub yaw: f64,
    pub terrain: TerrainClass,
    pub confidence: f64,
}
