//! Polar radar scans and their Cartesian resampling.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{shape_err, Error, Result};
use crate::geometry::Pose2;

pub const AZIMUTHS: usize = 400;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RadarProfile {
    Short,
    Long,
}

impl RadarProfile {
    pub fn range_resolution(self) -> f64 {
        match self {
            RadarProfile::Short => 0.0438,
            RadarProfile::Long => 0.1752,
        }
    }

    /// Range covered by the rendered scan (half its Cartesian extent).
    pub fn max_range(self) -> f64 {
        match self {
            RadarProfile::Short => 50.0,
            RadarProfile::Long => 200.0,
        }
    }

    pub fn bins(self) -> usize {
        (self.max_range() / self.range_resolution()).ceil() as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            RadarProfile::Short => "short",
            RadarProfile::Long => "long",
        }
    }
}

/// Power per (azimuth, range bin), azimuth-major. Azimuth `a` points
/// `2 pi a / A` counter-clockwise from the robot heading; bin `r` is centred
/// at `(r + 1/2) * range_resolution`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolarScan {
    pub azimuths: usize,
    pub bins: usize,
    pub range_resolution: f32,
    pub timestamp: f64,
    pub pose: Pose2,
    pub power: Vec<f32>,
}

impl PolarScan {
    pub fn new(azimuths: usize, bins: usize, range_resolution: f32, timestamp: f64, pose: Pose2, power: Vec<f32>) -> Result<Self> {
        if power.len() != azimuths * bins || azimuths == 0 || bins == 0 {
            return shape_err(format!("{} power values for {}x{} scan", power.len(), azimuths, bins));
        }
        if !(range_resolution > 0.0) {
            return Err(Error::Domain("range resolution must be positive".into()));
        }
        if power.iter().any(|p| !(*p >= 0.0)) {
            return Err(Error::Domain("radar power must be non-negative".into()));
        }
        Ok(Self { azimuths, bins, range_resolution, timestamp, pose, power })
    }

    pub fn max_range(&self) -> f64 {
        self.bins as f64 * self.range_resolution as f64
    }

    pub fn at(&self, a: usize, r: usize) -> f32 {
        self.power[a * self.bins + r]
    }
}

/// Square image centred on the robot, x to the right along heading, y up.
#[derive(Clone, Debug, PartialEq)]
pub struct CartesianScan {
    pub size: usize,
    pub metres_per_pixel: f64,
    /// Row-major, row 0 at the top (largest y).
    pub image: Vec<f64>,
}

/// Scan-frame coordinates of the centre of pixel (row, col).
pub fn pixel_center(size: usize, mpp: f64, row: usize, col: usize) -> (f64, f64) {
    let half = size as f64 / 2.0;
    ((col as f64 + 0.5 - half) * mpp, (half - row as f64 - 0.5) * mpp)
}

/// Continuous (row, col) position of a scan-frame point; pixel centres sit
/// at integer values.
pub fn point_to_pixel(size: usize, mpp: f64, x: f64, y: f64) -> (f64, f64) {
    let half = size as f64 / 2.0;
    (half - y / mpp - 0.5, x / mpp + half - 0.5)
}

pub fn polar_to_cartesian(scan: &PolarScan, size: usize, mpp: f64) -> Result<CartesianScan> {
    polar_to_cartesian_rotated(scan, size, mpp, 0.0)
}

/// Renders the scan as if the robot had been turned by `-angle`: the image
/// content appears rotated counter-clockwise by `angle`.
pub fn polar_to_cartesian_rotated(scan: &PolarScan, size: usize, mpp: f64, angle: f64) -> Result<CartesianScan> {
    if size < 32 || !(mpp > 0.0) {
        return Err(Error::Domain(format!("bad cartesian geometry {} px at {} m/px", size, mpp)));
    }
    let a_n = scan.azimuths as f64;
    let res = scan.range_resolution as f64;
    let max_r = scan.max_range();
    let mut image = vec![0.0; size * size];
    for row in 0..size {
        for col in 0..size {
            let (x, y) = pixel_center(size, mpp, row, col);
            let rho = x.hypot(y);
            if rho > max_r {
                continue;
            }
            let theta = (y.atan2(x) - angle).rem_euclid(2.0 * PI);
            let af = theta / (2.0 * PI) * a_n;
            let a0 = af.floor();
            let ta = af - a0;
            let a0 = (a0 as usize) % scan.azimuths;
            let a1 = (a0 + 1) % scan.azimuths;
            let rf = (rho / res - 0.5).clamp(0.0, (scan.bins - 1) as f64);
            let r0 = (rf.floor() as usize).min(scan.bins - 1);
            let r1 = (r0 + 1).min(scan.bins - 1);
            let tr = rf - r0 as f64;
            let p = |a: usize, r: usize| scan.at(a, r) as f64;
            let v0 = p(a0, r0) * (1.0 - tr) + p(a0, r1) * tr;
            let v1 = p(a1, r0) * (1.0 - tr) + p(a1, r1) * tr;
            image[row * size + col] = v0 * (1.0 - ta) + v1 * ta;
        }
    }
    Ok(CartesianScan { size, metres_per_pixel: mpp, image })
}

/// Pixels whose centre lies within the scan's maximum range.
pub fn in_range_mask(size: usize, mpp: f64, max_range: f64) -> Vec<bool> {
    let mut out = vec![false; size * size];
    for row in 0..size {
        for col in 0..size {
            let (x, y) = pixel_center(size, mpp, row, col);
            out[row * size + col] = x.hypot(y) <= max_range;
        }
    }
    out
}

/// Size and scale of rendered Cartesian scans.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanGeometry {
    pub size: usize,
    pub metres_per_pixel: f64,
}

impl ScanGeometry {
    /// 256 px square spanning twice the profile's maximum range.
    pub fn for_profile(p: RadarProfile) -> Self {
        Self::fitting(256, p.max_range())
    }

    pub fn fitting(size: usize, max_range: f64) -> Self {
        Self { size, metres_per_pixel: 2.0 * max_range / size as f64 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.size < 32 || !(self.metres_per_pixel > 0.0) {
            return Err(Error::Domain(format!(
                "bad scan geometry {} px at {} m/px",
                self.size, self.metres_per_pixel
            )));
        }
        Ok(())
    }

    pub fn pixels(&self) -> usize {
        self.size * self.size
    }
}
