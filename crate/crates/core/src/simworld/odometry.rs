use rand::Rng;
use rand_distr::StandardNormal;

use super::config::SimConfig;
use super::traverse::Traverse;
use crate::error::{Error, Result};
use crate::fusion::types::{GpsFix, VoIncrement};
use crate::geometry::wrap_angle;
use crate::rng;

/// Visual-odometry increments: exact body-frame motion plus Gaussian noise
/// and a constant yaw bias integrated over each step.
pub fn synth_vo(traverse: &Traverse, cfg: &SimConfig, seed: u64) -> Result<Vec<VoIncrement>> {
    if traverse.samples.len() < 2 {
        return Err(Error::Input("odometry needs at least two poses".into()));
    }
    let mut rng = rng::stream(seed, "vo");
    let mut noise = |sigma: f64| -> f64 {
        let n: f64 = rng.sample(StandardNormal);
        sigma * n
    };
    Ok(traverse
        .samples
        .windows(2)
        .map(|w| {
            let (p, q) = (w[0].pose, w[1].pose);
            let dt = w[1].t - w[0].t;
            let (dx, dy) = p.to_local(q.x, q.y);
            let dyaw = wrap_angle(q.yaw - p.yaw);
            VoIncrement {
                timestamp: w[1].t,
                dx: dx + noise(cfg.vo_trans_sigma),
                dy: dy + noise(cfg.vo_trans_sigma),
                dyaw: dyaw + cfg.vo_yaw_drift * dt + noise(cfg.vo_yaw_sigma),
            }
        })
        .collect())
}

/// GPS fixes at `gps_rate`, stamped with the nearest odometry timestamp.
pub fn synth_gps(traverse: &Traverse, cfg: &SimConfig, seed: u64) -> Result<Vec<GpsFix>> {
    if traverse.samples.len() < 2 {
        return Err(Error::Input("GPS needs at least two poses".into()));
    }
    let mut rng = rng::stream(seed, "gps");
    let period = 1.0 / cfg.gps_rate;
    let end = traverse.duration();
    let mut fixes = Vec::new();
    let mut j = 1usize;
    while j as f64 * period <= end + 1e-9 {
        let s = traverse.at_time(j as f64 * period);
        let nx: f64 = rng.sample(StandardNormal);
        let ny: f64 = rng.sample(StandardNormal);
        fixes.push(GpsFix {
            timestamp: s.t,
            x: s.pose.x + cfg.gps_sigma * nx,
            y: s.pose.y + cfg.gps_sigma * ny,
            sigma: cfg.gps_sigma,
        });
        j += 1;
    }
    Ok(fixes)
}
