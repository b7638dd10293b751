use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Mono audio in [-1, 1].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AudioClip {
    pub samples: Vec<f64>,
    pub sample_rate: u32,
}

impl AudioClip {
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::Domain("sample rate must be positive".into()));
        }
        if let Some(v) = samples.iter().find(|v| !(v.abs() <= 1.0)) {
            return Err(Error::Domain(format!("sample {} outside [-1, 1]", v)));
        }
        Ok(Self { samples, sample_rate })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    /// Sub-clip of `len` samples starting at `start`.
    pub fn window(&self, start: usize, len: usize) -> Result<AudioClip> {
        if start + len > self.samples.len() {
            return Err(Error::Domain(format!(
                "window [{}, {}) exceeds clip of {} samples",
                start,
                start + len,
                self.samples.len()
            )));
        }
        Ok(AudioClip { samples: self.samples[start..start + len].to_vec(), sample_rate: self.sample_rate })
    }
}
