use serde::{Deserialize, Serialize};

use super::polar::{pixel_center, point_to_pixel, ScanGeometry};
use crate::error::{Error, Result};
use crate::fusion::LabeledPose;
use crate::geometry::Pose2;

/// Default painted footprint: half the robot's width.
pub const FOOTPRINT_RADIUS: f64 = 0.33;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Unlabeled,
    NotPath,
    Path,
}

impl Label {
    pub fn to_gray(self) -> u8 {
        match self {
            Label::Unlabeled => 0,
            Label::NotPath => 128,
            Label::Path => 255,
        }
    }

    pub fn from_gray(v: u8) -> Result<Self> {
        match v {
            0 => Ok(Label::Unlabeled),
            128 => Ok(Label::NotPath),
            255 => Ok(Label::Path),
            _ => Err(Error::Format(format!("label mask value {} is not 0, 128 or 255", v))),
        }
    }
}

/// Per-pixel training labels aligned with a rendered scan.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelMask {
    pub size: usize,
    pub labels: Vec<Label>,
}

impl LabelMask {
    pub fn unlabeled(size: usize) -> Self {
        Self { size, labels: vec![Label::Unlabeled; size * size] }
    }

    pub fn get(&self, row: usize, col: usize) -> Label {
        self.labels[row * self.size + col]
    }

    pub fn count(&self, l: Label) -> usize {
        self.labels.iter().filter(|&&v| v == l).count()
    }
}

/// Paints a disc of `radius` metres around each trajectory label, expressed
/// in the frame of a scan taken at `pose`. Gravel becomes path, every other
/// terrain not-path; later labels overwrite earlier ones.
pub fn paint_labels(pose: Pose2, geom: ScanGeometry, trajectory: &[LabeledPose], radius: f64) -> Result<LabelMask> {
    geom.validate()?;
    if !(radius >= 0.0) {
        return Err(Error::Domain(format!("footprint radius must be non-negative, got {}", radius)));
    }
    let n = geom.size;
    let mpp = geom.metres_per_pixel;
    let mut mask = LabelMask::unlabeled(n);
    if trajectory.is_empty() {
        log::warn!("painting an empty trajectory");
        return Ok(mask);
    }
    let reach = radius / mpp + 1.0;
    for entry in trajectory {
        let (lx, ly) = pose.to_local(entry.x, entry.y);
        let (rc, cc) = point_to_pixel(n, mpp, lx, ly);
        let r0 = (rc - reach).floor().max(0.0);
        let c0 = (cc - reach).floor().max(0.0);
        let r1 = (rc + reach).ceil().min(n as f64 - 1.0);
        let c1 = (cc + reach).ceil().min(n as f64 - 1.0);
        if r0 > r1 || c0 > c1 {
            continue;
        }
        let label = if entry.terrain.is_path() { Label::Path } else { Label::NotPath };
        for row in r0 as usize..=r1 as usize {
            for col in c0 as usize..=c1 as usize {
                let (px, py) = pixel_center(n, mpp, row, col);
                if (px - lx).hypot(py - ly) <= radius {
                    mask.labels[row * n + col] = label;
                }
            }
        }
    }
    Ok(mask)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaskStats {
    pub labeled_fraction: f64,
    /// Path share of labelled pixels; 0 when nothing is labelled.
    pub path_fraction: f64,
    pub path_fraction_defined: bool,
}

pub fn mask_stats(mask: &LabelMask) -> MaskStats {
    let total = mask.labels.len();
    let path = mask.count(Label::Path);
    let labeled = total - mask.count(Label::Unlabeled);
    MaskStats {
        labeled_fraction: if total == 0 { 0.0 } else { labeled as f64 / total as f64 },
        path_fraction: if labeled == 0 { 0.0 } else { path as f64 / labeled as f64 },
        path_fraction_defined: labeled > 0,
    }
}
