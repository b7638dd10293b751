use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::image::{magnitude_to_db, AxisKind, TimeFrequencyImage};
use super::window::{window, WindowKind};
use crate::error::{domain_err, Error, Result};

pub const DEFAULT_FLOOR_DB: f64 = -120.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StftConfig {
    pub frame_len: usize,
    pub hop: usize,
    pub fft_size: usize,
    pub window: WindowKind,
}

impl StftConfig {
    /// Frames of `sample_rate / 100` samples (100 Hz bins), no overlap.
    pub fn for_rate(sample_rate: u32) -> Self {
        let m = (sample_rate / 100).max(2) as usize;
        Self { frame_len: m, hop: m, fft_size: m, window: WindowKind::Hamming }
    }

    pub fn validate(&self) -> Result<()> {
        if self.hop == 0 || self.hop > self.frame_len || self.frame_len > self.fft_size {
            return Err(Error::Config(format!(
                "need 0 < hop <= frame_len <= fft_size, got {} / {} / {}",
                self.hop, self.frame_len, self.fft_size
            )));
        }
        Ok(())
    }

    pub fn bins(&self) -> usize {
        self.fft_size / 2 + 1
    }

    pub fn frame_count(&self, len: usize) -> Result<usize> {
        if len < self.frame_len {
            return domain_err(format!("clip of {} samples shorter than one {}-sample frame", len, self.frame_len));
        }
        Ok((len - self.frame_len) / self.hop + 1)
    }
}

impl Default for StftConfig {
    fn default() -> Self {
        Self::for_rate(44_100)
    }
}

/// Complex STFT, frame-major: `frames[t][k]` for `k < N/2 + 1`.
/// The exponent is referenced to the start of each frame.
#[derive(Clone, Debug, PartialEq)]
pub struct Stft {
    pub frames: Vec<Vec<Complex64>>,
    pub fft_size: usize,
}

pub fn stft(x: &[f64], cfg: &StftConfig) -> Result<Stft> {
    cfg.validate()?;
    let nf = cfg.frame_count(x.len())?;
    let w = window(cfg.window, cfg.frame_len)?;
    let fft = FftPlanner::new().plan_fft_forward(cfg.fft_size);
    let mut buf = vec![Complex64::new(0.0, 0.0); cfg.fft_size];
    let mut frames = Vec::with_capacity(nf);
    for t in 0..nf {
        let start = t * cfg.hop;
        buf.iter_mut().for_each(|c| *c = Complex64::new(0.0, 0.0));
        for n in 0..cfg.frame_len {
            buf[n].re = x[start + n] * w[n];
        }
        fft.process(&mut buf);
        frames.push(buf[..cfg.bins()].to_vec());
    }
    Ok(Stft { frames, fft_size: cfg.fft_size })
}

/// `20 log10 |X|` per cell, clamped at `floor_db`; channels are FFT bins.
pub fn log_power(x: &Stft, sample_rate: f64, floor_db: f64) -> Result<TimeFrequencyImage> {
    let frames = x.frames.len();
    let bins = x.frames.first().map_or(0, |f| f.len());
    let mut values = vec![0.0; bins * frames];
    for (t, f) in x.frames.iter().enumerate() {
        for (k, c) in f.iter().enumerate() {
            values[k * frames + t] = magnitude_to_db(c.norm(), floor_db);
        }
    }
    let freqs = (0..bins).map(|k| k as f64 * sample_rate / x.fft_size as f64).collect();
    TimeFrequencyImage::new(bins, frames, values, freqs, AxisKind::Linear, floor_db)
}

/// Log-magnitude STFT image.
pub fn spectrogram(x: &[f64], sample_rate: f64, cfg: &StftConfig) -> Result<TimeFrequencyImage> {
    log_power(&stft(x, cfg)?, sample_rate, DEFAULT_FLOOR_DB)
}

/// `|X|^2` per frame and bin, frame-major.
pub fn power_frames(x: &Stft) -> Vec<Vec<f64>> {
    x.frames.iter().map(|f| f.iter().map(|c| c.norm_sqr()).collect()).collect()
}
