use rand::Rng;
use serde::{Deserialize, Serialize};

use super::config::SimConfig;
use super::world::TerrainMap;
use crate::error::{Error, Result};
use crate::geometry::{wrap_angle, Pose2};
use crate::rng;
use crate::terrain::TerrainClass;

const LOOKAHEAD: f64 = 2.0;
const MAX_TURN_RATE: f64 = 0.8;
const ROUTE_SPACING: f64 = 0.25;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruthSample {
    pub t: f64,
    pub pose: Pose2,
    pub terrain: TerrainClass,
}

/// True robot trajectory, one sample every `dt` seconds starting at t = 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Traverse {
    pub dt: f64,
    pub samples: Vec<TruthSample>,
}

impl Traverse {
    pub fn duration(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| s.t)
    }

    /// Sample nearest to time `t` (clamped to the trajectory).
    pub fn at_time(&self, t: f64) -> &TruthSample {
        let k = (t / self.dt).round().max(0.0) as usize;
        &self.samples[k.min(self.samples.len() - 1)]
    }
}

fn smoothstep(u: f64) -> f64 {
    let u = u.clamp(0.0, 1.0);
    u * u * (3.0 - 2.0 * u)
}

/// Lateral offset of an excursion at arc length `s` from its centre `sc`.
fn bump(s: f64, sc: f64, len: f64) -> f64 {
    let ramp = 0.35 * len;
    let d = (s - sc).abs();
    let flat = len / 2.0 - ramp;
    if d <= flat {
        1.0
    } else {
        1.0 - smoothstep((d - flat) / ramp)
    }
}

/// Reference route: the driven stretch of the main path, resampled, with
/// grass excursions pushed away from the untraversed path.
fn reference_route(map: &TerrainMap, cfg: &SimConfig, seed: u64) -> Result<Vec<(f64, f64)>> {
    let p = cfg.world_params();
    let main = map.main_path();
    let (extent, _) = map.extent();
    let x_lo = extent * (0.5 - p.traverse_span / 2.0);
    let x_hi = extent * (0.5 + p.traverse_span / 2.0);

    let mut base = Vec::new();
    for s in main.vertices.windows(2) {
        let (a, b) = (s[0], s[1]);
        let len = (b.0 - a.0).hypot(b.1 - a.1);
        let n = (len / ROUTE_SPACING).ceil().max(1.0) as usize;
        for i in 0..n {
            let u = i as f64 / n as f64;
            let q = (a.0 + u * (b.0 - a.0), a.1 + u * (b.1 - a.1));
            if q.0 >= x_lo && q.0 <= x_hi {
                base.push(q);
            }
        }
    }
    if base.len() < 8 {
        return Err(Error::Config("driven stretch of the main path is too short".into()));
    }

    let mut arc = vec![0.0; base.len()];
    for i in 1..base.len() {
        arc[i] = arc[i - 1] + (base[i].0 - base[i - 1].0).hypot(base[i].1 - base[i - 1].1);
    }
    let total = arc[base.len() - 1];
    let mut rng = rng::stream(seed, "traverse");
    let n_exc = p.excursions;
    let centres: Vec<(f64, f64)> = (0..n_exc)
        .map(|i| {
            let slot = total * (0.15 + 0.7 * (i as f64 + 0.5) / n_exc as f64);
            let jitter = rng.random_range(-0.05..0.05) * total;
            let offset = if p.excursion_offset.1 > p.excursion_offset.0 {
                rng.random_range(p.excursion_offset.0..p.excursion_offset.1)
            } else {
                p.excursion_offset.0
            };
            (slot + jitter, offset)
        })
        .collect();

    let route = (0..base.len())
        .map(|i| {
            let (j0, j1) = (i.saturating_sub(1), (i + 1).min(base.len() - 1));
            let (tx, ty) = (base[j1].0 - base[j0].0, base[j1].1 - base[j0].1);
            let tn = tx.hypot(ty).max(1e-12);
            let (nx, ny) = (-ty / tn, tx / tn);
            let off: f64 = centres.iter().map(|&(sc, o)| o * bump(arc[i], sc, p.excursion_length)).sum();
            let off = off * map.excursion_side;
            (base[i].0 + off * nx, base[i].1 + off * ny)
        })
        .collect();
    Ok(route)
}

/// Drives the robot along the reference route with pure-pursuit steering at
/// constant speed, recording the true pose every odometry period.
pub fn plan_traverse(map: &TerrainMap, cfg: &SimConfig, seed: u64) -> Result<Traverse> {
    cfg.validate()?;
    let route = reference_route(map, cfg, seed)?;
    let dt = cfg.dt();
    let step = cfg.speed * dt;
    let (x0, y0) = route[0];
    let yaw0 = (route[4].1 - y0).atan2(route[4].0 - x0);
    let mut pose = Pose2::new(x0, y0, yaw0);
    let mut nearest = 0usize;
    let end = route[route.len() - 1];
    let mut samples = vec![TruthSample { t: 0.0, pose, terrain: map.lookup(x0, y0) }];
    let max_steps = (4.0 * route.len() as f64 * ROUTE_SPACING / step) as usize + 100;

    for k in 1..max_steps {
        let window_end = (nearest + 40).min(route.len());
        let d2 = |q: (f64, f64)| (q.0 - pose.x).powi(2) + (q.1 - pose.y).powi(2);
        nearest = (nearest..window_end)
            .min_by(|&a, &b| d2(route[a]).total_cmp(&d2(route[b])))
            .unwrap_or(nearest);
        if nearest + 1 >= route.len() || d2(end) < (LOOKAHEAD / 2.0).powi(2) {
            break;
        }
        let target = (nearest..route.len())
            .find(|&j| d2(route[j]) >= LOOKAHEAD * LOOKAHEAD)
            .map_or(end, |j| route[j]);
        let alpha = wrap_angle((target.1 - pose.y).atan2(target.0 - pose.x) - pose.yaw);
        let omega = (2.0 * cfg.speed * alpha.sin() / LOOKAHEAD).clamp(-MAX_TURN_RATE, MAX_TURN_RATE);
        // Straight step along the current heading, then turn.
        pose = pose.compose(step, 0.0, omega * dt);
        if !map.in_bounds(pose.x, pose.y) {
            return Err(Error::Config("traverse left the map".into()));
        }
        samples.push(TruthSample { t: k as f64 * dt, pose, terrain: map.lookup(pose.x, pose.y) });
    }
    Ok(Traverse { dt, samples })
}
