use serde::{Deserialize, Serialize};

use crate::error::{shape_err, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AxisKind {
    Linear,
    Mel,
    Gammatone,
}

/// Channels x frames matrix of dB values, row-major by channel.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeFrequencyImage {
    pub channels: usize,
    pub frames: usize,
    pub values: Vec<f64>,
    pub channel_freqs: Vec<f64>,
    pub axis_kind: AxisKind,
    pub floor_db: f64,
}

impl TimeFrequencyImage {
    pub fn new(
        channels: usize,
        frames: usize,
        values: Vec<f64>,
        channel_freqs: Vec<f64>,
        axis_kind: AxisKind,
        floor_db: f64,
    ) -> Result<Self> {
        if values.len() != channels * frames || channel_freqs.len() != channels || frames == 0 {
            return shape_err(format!(
                "{} values / {} freqs for {}x{} image",
                values.len(),
                channel_freqs.len(),
                channels,
                frames
            ));
        }
        Ok(Self { channels, frames, values, channel_freqs, axis_kind, floor_db })
    }

    pub fn get(&self, channel: usize, frame: usize) -> f64 {
        self.values[channel * self.frames + frame]
    }

    pub fn row(&self, channel: usize) -> &[f64] {
        &self.values[channel * self.frames..(channel + 1) * self.frames]
    }
}

/// `10 log10(p)` clamped below at `floor_db`; zero power maps to the floor.
pub fn power_to_db(p: f64, floor_db: f64) -> f64 {
    if p > 0.0 {
        (10.0 * p.log10()).max(floor_db)
    } else {
        floor_db
    }
}

/// `20 log10 |x|` clamped below at `floor_db`.
pub fn magnitude_to_db(m: f64, floor_db: f64) -> f64 {
    if m > 0.0 {
        (20.0 * m.log10()).max(floor_db)
    } else {
        floor_db
    }
}
