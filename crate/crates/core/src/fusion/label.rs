use serde::{Deserialize, Serialize};

use super::ekf::FusedPose;
use super::types::{LabeledPose, TerrainPrediction};
use crate::error::{Error, Result};

/// Largest gap between a prediction and the pose it is attached to.
pub const ASSOCIATION_WINDOW: f64 = 0.25;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabeledTrajectory {
    pub entries: Vec<LabeledPose>,
    /// Predictions with no pose within the association window.
    pub dropped: usize,
}

/// Attaches each terrain prediction to the fused pose nearest in time.
pub fn label_trajectory(traj: &[FusedPose], predictions: &[TerrainPrediction]) -> Result<LabeledTrajectory> {
    if traj.is_empty() || predictions.is_empty() {
        return Err(Error::Association("trajectory and predictions must both be non-empty".into()));
    }
    let mut entries = Vec::with_capacity(predictions.len());
    let mut dropped = 0;
    for p in predictions {
        let i = traj.partition_point(|f| f.timestamp < p.timestamp);
        let nearest = [i.checked_sub(1), (i < traj.len()).then_some(i)]
            .into_iter()
            .flatten()
            .min_by(|&a, &b| {
                (traj[a].timestamp - p.timestamp).abs().total_cmp(&(traj[b].timestamp - p.timestamp).abs())
            })
            .expect("trajectory is non-empty");
        let f = traj[nearest];
        if (f.timestamp - p.timestamp).abs() > ASSOCIATION_WINDOW {
            dropped += 1;
            continue;
        }
        entries.push(LabeledPose {
            timestamp: p.timestamp,
            x: f.pose.x,
            y: f.pose.y,
            yaw: f.pose.yaw,
            terrain: p.terrain,
            confidence: p.confidence(),
        });
    }
    if entries.is_empty() {
        return Err(Error::Association(format!("none of {} predictions matched a pose", predictions.len())));
    }
    if dropped > 0 {
        log::warn!("{} terrain predictions had no pose within {} s", dropped, ASSOCIATION_WINDOW);
    }
    Ok(LabeledTrajectory { entries, dropped })
}
