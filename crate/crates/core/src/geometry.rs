//! Planar poses and frame transforms.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Wraps an angle to (-pi, pi].
pub fn wrap_angle(a: f64) -> f64 {
    let mut r = a.rem_euclid(2.0 * PI);
    if r > PI {
        r -= 2.0 * PI;
    }
    r
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pose2 {
    pub x: f64,
    pub y: f64,
    pub yaw: f64,
}

impl Pose2 {
    pub fn new(x: f64, y: f64, yaw: f64) -> Self {
        Self { x, y, yaw }
    }

    /// Global point expressed in this pose's body frame.
    pub fn to_local(&self, gx: f64, gy: f64) -> (f64, f64) {
        let (s, c) = self.yaw.sin_cos();
        let dx = gx - self.x;
        let dy = gy - self.y;
        (c * dx + s * dy, -s * dx + c * dy)
    }

    /// Body-frame point expressed in the global frame.
    pub fn to_global(&self, lx: f64, ly: f64) -> (f64, f64) {
        let (s, c) = self.yaw.sin_cos();
        (self.x + c * lx - s * ly, self.y + s * lx + c * ly)
    }

    /// Applies a body-frame increment.
    pub fn compose(&self, dx: f64, dy: f64, dyaw: f64) -> Pose2 {
        let (gx, gy) = self.to_global(dx, dy);
        Pose2::new(gx, gy, wrap_angle(self.yaw + dyaw))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_range() {
        assert_eq!(wrap_angle(PI), PI);
        assert!((wrap_angle(-PI) - PI).abs() < 1e-15);
        assert!((wrap_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn quarter_turn_rotation() {
        let p = Pose2::new(0.0, 0.0, PI / 2.0);
        let q = p.compose(1.0, 0.0, 0.0);
        assert!(q.x.abs() < 1e-12 && (q.y - 1.0).abs() < 1e-12);
    }
}
