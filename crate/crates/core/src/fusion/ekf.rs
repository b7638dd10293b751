use nalgebra::{Matrix2, Matrix4, Matrix4x2, SymmetricEigen, Vector4};
use serde::{Deserialize, Serialize};

use super::types::{GpsFix, VoIncrement};
use crate::error::{Error, Result};
use crate::geometry::{wrap_angle, Pose2};

/// Smallest eigenvalue accepted as positive semi-definite.
pub const PSD_TOLERANCE: f64 = -1e-9;

/// Process noise of the filter.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EkfConfig {
    /// Per-step translation noise of odometry, metres.
    pub trans_sigma: f64,
    /// Per-step heading noise of odometry, rad.
    pub yaw_sigma: f64,
    /// Random-walk density of the heading bias, rad/s per sqrt(s).
    pub bias_walk: f64,
    /// Prior standard deviation of the heading bias, rad/s.
    pub initial_bias_sigma: f64,
    /// With `false` the bias stays at zero and the filter is a plain
    /// (x, y, yaw) EKF.
    pub estimate_bias: bool,
}

impl Default for EkfConfig {
    fn default() -> Self {
        Self {
            trans_sigma: 0.01,
            yaw_sigma: 1e-4,
            bias_walk: 1e-5,
            initial_bias_sigma: 1f64.to_radians(),
            estimate_bias: true,
        }
    }
}

impl EkfConfig {
    pub fn validate(&self) -> Result<()> {
        let vals = [self.trans_sigma, self.yaw_sigma, self.bias_walk, self.initial_bias_sigma];
        if vals.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
            return Err(Error::Config("EKF noise parameters must be finite and non-negative".into()));
        }
        Ok(())
    }
}

/// Filter state: pose plus odometry heading bias, with covariance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EkfState {
    pub timestamp: f64,
    /// (x, y, yaw, yaw bias in rad/s).
    pub mean: Vector4<f64>,
    pub covariance: Matrix4<f64>,
}

impl EkfState {
    pub fn new(timestamp: f64, pose: Pose2, cfg: &EkfConfig) -> Self {
        let bias_var = if cfg.estimate_bias { cfg.initial_bias_sigma.powi(2) } else { 0.0 };
        Self {
            timestamp,
            mean: Vector4::new(pose.x, pose.y, wrap_angle(pose.yaw), 0.0),
            covariance: Matrix4::from_diagonal(&Vector4::new(0.0, 0.0, 0.0, bias_var)),
        }
    }

    pub fn pose(&self) -> Pose2 {
        Pose2::new(self.mean[0], self.mean[1], self.mean[2])
    }

    pub fn bias(&self) -> f64 {
        self.mean[3]
    }

    pub fn min_eigenvalue(&self) -> f64 {
        SymmetricEigen::new(self.covariance).eigenvalues.min()
    }

    pub fn position_trace(&self) -> f64 {
        self.covariance[(0, 0)] + self.covariance[(1, 1)]
    }
}

fn symmetrize_checked(p: Matrix4<f64>, what: &str) -> Result<Matrix4<f64>> {
    let p = (p + p.transpose()) * 0.5;
    if p.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric(format!("non-finite covariance after {}", what)));
    }
    let min = SymmetricEigen::new(p).eigenvalues.min();
    if min < PSD_TOLERANCE {
        return Err(Error::Numeric(format!("covariance not PSD after {} (eigenvalue {:e})", what, min)));
    }
    Ok(p)
}

/// Motion step: rotates the body-frame increment into the global frame and
/// subtracts the estimated heading bias over the elapsed time.
pub fn ekf_predict(state: &EkfState, vo: &VoIncrement, cfg: &EkfConfig) -> Result<EkfState> {
    let dt = vo.timestamp - state.timestamp;
    if !(dt >= 0.0) {
        return Err(Error::Input(format!(
            "odometry at {} precedes filter time {}",
            vo.timestamp, state.timestamp
        )));
    }
    if !(vo.dx.is_finite() && vo.dy.is_finite() && vo.dyaw.is_finite()) {
        return Err(Error::Input("non-finite odometry increment".into()));
    }
    let m = state.mean;
    let (s, c) = m[2].sin_cos();
    let mut mean = m;
    mean[0] += c * vo.dx - s * vo.dy;
    mean[1] += s * vo.dx + c * vo.dy;
    mean[2] = wrap_angle(m[2] + vo.dyaw - m[3] * dt);

    let mut f = Matrix4::identity();
    f[(0, 2)] = -s * vo.dx - c * vo.dy;
    f[(1, 2)] = c * vo.dx - s * vo.dy;
    f[(2, 3)] = -dt;
    let bias_q = if cfg.estimate_bias { cfg.bias_walk.powi(2) * dt } else { 0.0 };
    let q = Matrix4::from_diagonal(&Vector4::new(
        cfg.trans_sigma.powi(2),
        cfg.trans_sigma.powi(2),
        cfg.yaw_sigma.powi(2),
        bias_q,
    ));
    let p = f * state.covariance * f.transpose() + q;
    Ok(EkfState { timestamp: vo.timestamp, mean, covariance: symmetrize_checked(p, "predict")? })
}

/// Position-only update with `R = sigma^2 I`, in Joseph form.
pub fn ekf_update(state: &EkfState, gps: &GpsFix) -> Result<EkfState> {
    if !(gps.x.is_finite() && gps.y.is_finite() && gps.sigma > 0.0) {
        return Err(Error::Input(format!("invalid GPS fix at {}", gps.timestamp)));
    }
    let p = state.covariance;
    let r = Matrix2::identity() * gps.sigma.powi(2);
    let s = p.fixed_view::<2, 2>(0, 0).into_owned() + r;
    let s_inv = s
        .try_inverse()
        .filter(|_| s.determinant() > 0.0)
        .ok_or_else(|| Error::Numeric("singular innovation covariance".into()))?;
    let pht: Matrix4x2<f64> = p.fixed_view::<4, 2>(0, 0).into_owned();
    let k = pht * s_inv;
    let innovation = nalgebra::Vector2::new(gps.x - state.mean[0], gps.y - state.mean[1]);
    let mut mean = state.mean + k * innovation;
    mean[2] = wrap_angle(mean[2]);
    let mut ikh: Matrix4<f64> = Matrix4::identity();
    let mut kh = ikh;
    kh.fill(0.0);
    kh.fixed_view_mut::<4, 2>(0, 0).copy_from(&k);
    ikh -= kh;
    let p = ikh * p * ikh.transpose() + k * r * k.transpose();
    Ok(EkfState { timestamp: state.timestamp, mean, covariance: symmetrize_checked(p, "update")? })
}

/// Filter output at one odometry timestamp.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FusedPose {
    pub timestamp: f64,
    pub pose: Pose2,
    pub position_trace: f64,
}

/// Runs the filter over time-sorted streams. GPS fixes are applied after
/// the odometry step that reaches their timestamp; the state is emitted at
/// the start time and after every odometry increment.
pub fn fuse(vo: &[VoIncrement], gps: &[GpsFix], init: Pose2, t0: f64, cfg: &EkfConfig) -> Result<Vec<FusedPose>> {
    cfg.validate()?;
    if vo.windows(2).any(|w| !(w[1].timestamp > w[0].timestamp)) || vo.first().is_some_and(|v| v.timestamp < t0) {
        return Err(Error::Input("odometry timestamps must increase strictly from the start time".into()));
    }
    if gps.windows(2).any(|w| !(w[1].timestamp >= w[0].timestamp)) {
        return Err(Error::Input("GPS timestamps must be sorted".into()));
    }
    const EPS: f64 = 1e-9;
    let mut state = EkfState::new(t0, init, cfg);
    let mut out = Vec::with_capacity(vo.len() + 1);
    let mut g = 0;
    let emit = |s: &EkfState| FusedPose { timestamp: s.timestamp, pose: s.pose(), position_trace: s.position_trace() };
    while g < gps.len() && gps[g].timestamp <= t0 + EPS {
        state = ekf_update(&state, &gps[g])?;
        g += 1;
    }
    out.push(emit(&state));
    for inc in vo {
        state = ekf_predict(&state, inc, cfg)?;
        while g < gps.len() && gps[g].timestamp <= inc.timestamp + EPS {
            state = ekf_update(&state, &gps[g])?;
            g += 1;
        }
        out.push(emit(&state));
    }
    Ok(out)
}
