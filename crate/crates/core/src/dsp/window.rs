use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain_err, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WindowKind {
    Hamming,
    Rectangular,
}

/// `w[n] = 0.54 - 0.46 cos(2 pi n / (M - 1))`.
pub fn hamming_window(m: usize) -> Result<Vec<f64>> {
    if m < 2 {
        return domain_err(format!("hamming window needs at least 2 points, got {}", m));
    }
    let d = (m - 1) as f64;
    Ok((0..m).map(|n| 0.54 - 0.46 * (2.0 * PI * n as f64 / d).cos()).collect())
}

pub fn window(kind: WindowKind, m: usize) -> Result<Vec<f64>> {
    match kind {
        WindowKind::Hamming => hamming_window(m),
        WindowKind::Rectangular => {
            if m == 0 {
                return domain_err("empty window");
            }
            Ok(vec![1.0; m])
        }
    }
}
