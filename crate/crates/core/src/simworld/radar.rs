use std::f64::consts::PI;

use rand::Rng;
use rand_distr::Exp1;

use super::config::SimConfig;
use super::world::TerrainMap;
use crate::canvas::polar::{PolarScan, AZIMUTHS};
use crate::error::{Error, Result};
use crate::geometry::Pose2;
use crate::rng;

/// Radial extent of a scatterer and its shadow along one ray.
#[derive(Clone, Copy, Debug)]
struct Hit {
    enter: f64,
    exit: f64,
}

/// Scatterer hits along the ray from `origin` in direction `(ux, uy)`.
fn ray_hits(map: &TerrainMap, origin: (f64, f64), ux: f64, uy: f64, max_range: f64) -> Vec<Hit> {
    let mut hits = Vec::new();
    for s in &map.scatterers {
        let (cx, cy) = (s.x - origin.0, s.y - origin.1);
        let t = cx * ux + cy * uy;
        if t + s.radius < 0.0 || t - s.radius > max_range {
            continue;
        }
        let d = (cx * uy - cy * ux).abs();
        if d > s.radius {
            continue;
        }
        let half = (s.radius * s.radius - d * d).sqrt();
        hits.push(Hit { enter: (t - half).max(0.0), exit: t + half });
    }
    hits
}

/// Renders one scan: terrain reflectivity with unit-mean exponential speckle,
/// bright returns from scatterers and attenuated shadows behind them.
pub fn synth_radar(map: &TerrainMap, pose: Pose2, cfg: &SimConfig, timestamp: f64, seed: u64) -> Result<PolarScan> {
    if !map.in_bounds(pose.x, pose.y) {
        return Err(Error::Domain(format!("radar pose ({:.2}, {:.2}) outside the map", pose.x, pose.y)));
    }
    let profile = cfg.radar_profile;
    let wp = cfg.world_params();
    let res = profile.range_resolution();
    let bins = profile.bins();
    let max_range = bins as f64 * res;
    let refl = cfg.terrain_reflectivity;
    let mut rng = rng::stream(seed, "radar");
    let mut power = Vec::with_capacity(AZIMUTHS * bins);
    for a in 0..AZIMUTHS {
        let theta = pose.yaw + 2.0 * PI * a as f64 / AZIMUTHS as f64;
        let (uy, ux) = theta.sin_cos();
        let hits = ray_hits(map, (pose.x, pose.y), ux, uy, max_range);
        for r in 0..bins {
            let rho = (r as f64 + 0.5) * res;
            let mut mean = refl.of(map.lookup(pose.x + rho * ux, pose.y + rho * uy));
            for h in &hits {
                if rho >= h.enter && rho <= h.exit {
                    mean = wp.scatterer_reflectivity;
                    break;
                }
                if rho > h.exit && rho <= h.exit + wp.shadow_length {
                    mean *= wp.shadow_attenuation;
                }
            }
            let speckle: f64 = if cfg.speckle_on { rng.sample(Exp1) } else { 1.0 };
            power.push((mean * speckle) as f32);
        }
    }
    PolarScan::new(AZIMUTHS, bins, res as f32, timestamp, pose, power)
}
