use super::image::{power_to_db, AxisKind, TimeFrequencyImage};
use super::stft::{power_frames, stft, StftConfig, DEFAULT_FLOOR_DB};
use crate::error::{domain_err, Result};

/// `m = 1127 ln(1 + f / 700)`.
pub fn mel_frequency(f: f64) -> Result<f64> {
    if !(f >= 0.0) {
        return domain_err(format!("negative frequency {}", f));
    }
    Ok(1127.0 * (f / 700.0).ln_1p())
}

pub fn mel_to_hz(m: f64) -> f64 {
    700.0 * (m / 1127.0).exp_m1()
}

/// Triangular filters on the mel axis, sampled onto FFT bins.
#[derive(Clone, Debug, PartialEq)]
pub struct MelFilterbank {
    pub n_channels: usize,
    pub bins: usize,
    /// Row-major `n_channels x bins`.
    pub weights: Vec<f64>,
    pub center_freqs: Vec<f64>,
}

/// Integral of the unit triangle with corners `(a,0), (c,1), (b,0)` over `[lo, hi]`.
fn triangle_integral(a: f64, c: f64, b: f64, lo: f64, hi: f64) -> f64 {
    // Piecewise-linear antiderivative.
    let prim = |x: f64| -> f64 {
        if x <= a {
            0.0
        } else if x <= c {
            (x - a).powi(2) / (2.0 * (c - a))
        } else if x <= b {
            (c - a) / 2.0 + (b - c) / 2.0 - (b - x).powi(2) / (2.0 * (b - c))
        } else {
            (b - a) / 2.0
        }
    };
    prim(hi) - prim(lo)
}

impl MelFilterbank {
    /// `n_channels` triangles with edges equally spaced in mel between 0 and
    /// Nyquist. Each weight is the mean of the triangle over the bin's
    /// frequency cell `[(k - 1/2) df, (k + 1/2) df]`, so narrow low-frequency
    /// triangles still receive weight and adjacent triangles sum to at most 1.
    pub fn new(n_channels: usize, fft_size: usize, sample_rate: f64) -> Result<Self> {
        if n_channels < 2 {
            return domain_err(format!("need at least 2 mel channels, got {}", n_channels));
        }
        if fft_size < 2 || !(sample_rate > 0.0) {
            return domain_err("invalid fft size or sample rate");
        }
        let bins = fft_size / 2 + 1;
        let df = sample_rate / fft_size as f64;
        let top = mel_frequency(sample_rate / 2.0)?;
        let edges: Vec<f64> = (0..n_channels + 2)
            .map(|i| mel_to_hz(top * i as f64 / (n_channels + 1) as f64))
            .collect();
        let mut weights = vec![0.0; n_channels * bins];
        for j in 0..n_channels {
            let (a, c, b) = (edges[j], edges[j + 1], edges[j + 2]);
            for k in 0..bins {
                let lo = (k as f64 - 0.5) * df;
                let hi = (k as f64 + 0.5) * df;
                weights[j * bins + k] = triangle_integral(a, c, b, lo, hi) / df;
            }
        }
        Ok(Self { n_channels, bins, weights, center_freqs: edges[1..=n_channels].to_vec() })
    }

    pub fn row(&self, j: usize) -> &[f64] {
        &self.weights[j * self.bins..(j + 1) * self.bins]
    }

    /// Weighted sum of one power spectrum per channel.
    pub fn apply(&self, power: &[f64]) -> Vec<f64> {
        (0..self.n_channels)
            .map(|j| self.row(j).iter().zip(power).map(|(w, p)| w * p).sum())
            .collect()
    }
}

pub fn mel_spectrogram(
    x: &[f64],
    sample_rate: f64,
    cfg: &StftConfig,
    n_channels: usize,
) -> Result<TimeFrequencyImage> {
    let fb = MelFilterbank::new(n_channels, cfg.fft_size, sample_rate)?;
    let p = power_frames(&stft(x, cfg)?);
    let frames = p.len();
    let mut values = vec![0.0; n_channels * frames];
    for (t, frame) in p.iter().enumerate() {
        for (j, e) in fb.apply(frame).into_iter().enumerate() {
            values[j * frames + t] = power_to_db(e, DEFAULT_FLOOR_DB);
        }
    }
    TimeFrequencyImage::new(n_channels, frames, values, fb.center_freqs, AxisKind::Mel, DEFAULT_FLOOR_DB)
}
