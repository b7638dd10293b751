use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use super::image::{power_to_db, AxisKind, TimeFrequencyImage};
use super::stft::{StftConfig, DEFAULT_FLOOR_DB};
use super::window::hamming_window;
use crate::error::{domain_err, Error, Result};

const EAR_Q: f64 = 9.26449;
const MIN_BW: f64 = 24.7;
/// Envelope fraction of its peak below which impulse responses are cut.
pub const IR_TRUNCATION: f64 = 1e-5;

/// `b = 1.019 (fc / 9.26449 + 24.7)`.
pub fn erb_bandwidth(fc: f64) -> Result<f64> {
    if !(fc >= 0.0) {
        return domain_err(format!("negative centre frequency {}", fc));
    }
    Ok(1.019 * (fc / EAR_Q + MIN_BW))
}

/// `t^(a-1) e^(-2 pi b t) cos(2 pi fc t)` for `t >= 0`, else 0.
pub fn gammatone_ir(t: f64, fc: f64, a: u32, b: f64) -> Result<f64> {
    if !(fc > 0.0) {
        return domain_err(format!("centre frequency must be positive, got {}", fc));
    }
    if t < 0.0 {
        return Ok(0.0);
    }
    Ok(t.powi(a as i32 - 1) * (-2.0 * PI * b * t).exp() * (2.0 * PI * fc * t).cos())
}

#[derive(Clone, Debug, PartialEq)]
pub struct GammatoneFilterbank {
    pub order: u32,
    pub center_freqs: Vec<f64>,
    pub bandwidths: Vec<f64>,
    pub sample_rate: f64,
}

impl GammatoneFilterbank {
    pub fn new(center_freqs: Vec<f64>, sample_rate: f64) -> Result<Self> {
        if center_freqs.is_empty() {
            return domain_err("empty filterbank");
        }
        if center_freqs.windows(2).any(|w| w[1] <= w[0]) {
            return domain_err("centre frequencies must be strictly increasing");
        }
        if center_freqs[0] <= 0.0 || *center_freqs.last().unwrap() >= sample_rate / 2.0 {
            return domain_err("centre frequencies must lie in (0, sample_rate / 2)");
        }
        let bandwidths = center_freqs.iter().map(|&f| erb_bandwidth(f)).collect::<Result<_>>()?;
        Ok(Self { order: 2, center_freqs, bandwidths, sample_rate })
    }

    /// `n` centre frequencies spaced uniformly on the ERB-rate scale.
    pub fn erb_spaced(n: usize, fmin: f64, fmax: f64, sample_rate: f64) -> Result<Self> {
        if n == 0 || !(fmin > 0.0) || !(fmax > fmin) {
            return domain_err(format!("bad filterbank range {}..{} with {} channels", fmin, fmax, n));
        }
        let q = EAR_Q * MIN_BW;
        let step = ((fmax + q).ln() - (fmin + q).ln()) / n as f64;
        let mut cfs: Vec<f64> = (1..=n).map(|i| -q + ((fmax + q).ln() - i as f64 * step).exp()).collect();
        cfs.reverse();
        Self::new(cfs, sample_rate)
    }

    pub fn len(&self) -> usize {
        self.center_freqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.center_freqs.is_empty()
    }

    /// Continuous-time frequency response of channel `i` at `f` Hz
    /// (order 2: `1/2 [1/(alpha + j2pi(f - fc))^2 + 1/(alpha + j2pi(f + fc))^2]`).
    pub fn response(&self, i: usize, f: f64) -> Complex64 {
        let fc = self.center_freqs[i];
        let alpha = 2.0 * PI * self.bandwidths[i];
        let d1 = Complex64::new(alpha, 2.0 * PI * (f - fc));
        let d2 = Complex64::new(alpha, 2.0 * PI * (f + fc));
        0.5 * (1.0 / (d1 * d1) + 1.0 / (d2 * d2))
    }

    /// Sampled impulse response of channel `i`, scaled to unit gain at its
    /// centre frequency and truncated once the envelope decays below
    /// [`IR_TRUNCATION`] of its peak.
    pub fn impulse_response(&self, i: usize) -> Result<Vec<f64>> {
        let fc = self.center_freqs[i];
        let b = self.bandwidths[i];
        let alpha = 2.0 * PI * b;
        let fs = self.sample_rate;
        let scale = 1.0 / (fs * self.response(i, fc).norm());
        let peak_t = 1.0 / alpha;
        let peak_env = peak_t * (-alpha * peak_t).exp();
        let mut out = Vec::new();
        let mut n = 0usize;
        loop {
            let t = n as f64 / fs;
            let env = t * (-alpha * t).exp();
            if t > peak_t && env < IR_TRUNCATION * peak_env {
                break;
            }
            out.push(gammatone_ir(t, fc, self.order, b)? * scale);
            n += 1;
        }
        Ok(out)
    }

    /// Envelope peak delay of channel `i` in samples, `(a - 1) / (2 pi b)`.
    pub fn group_delay_samples(&self, i: usize) -> usize {
        (self.sample_rate / (2.0 * PI * self.bandwidths[i])).round() as usize
    }
}

/// Linear convolution `x * h`, full length, via FFT.
pub fn fft_convolve(x: &[f64], h: &[f64]) -> Vec<f64> {
    if x.is_empty() || h.is_empty() {
        return Vec::new();
    }
    let len = x.len() + h.len() - 1;
    let n = len.next_power_of_two();
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let mut a: Vec<Complex64> = (0..n).map(|i| Complex64::new(x.get(i).copied().unwrap_or(0.0), 0.0)).collect();
    let mut b: Vec<Complex64> = (0..n).map(|i| Complex64::new(h.get(i).copied().unwrap_or(0.0), 0.0)).collect();
    fwd.process(&mut a);
    fwd.process(&mut b);
    for (u, v) in a.iter_mut().zip(&b) {
        *u *= v;
    }
    inv.process(&mut a);
    a[..len].iter().map(|c| c.re / n as f64).collect()
}

/// Per channel, frame energies of the filter output: `energy[i][t]` sums
/// `y^2` over samples `[t hop, t hop + frame_len)` of the output advanced by
/// the channel's group delay.
pub fn gammatone_energies(
    x: &[f64],
    fb: &GammatoneFilterbank,
    frame_len: usize,
    hop: usize,
) -> Result<Vec<Vec<f64>>> {
    if frame_len < 1 || hop < 1 {
        return domain_err("frame length and hop must be at least one sample");
    }
    if x.len() < frame_len {
        return domain_err(format!("clip of {} samples shorter than one frame", x.len()));
    }
    let nf = (x.len() - frame_len) / hop + 1;
    let mut out = Vec::with_capacity(fb.len());
    for i in 0..fb.len() {
        let h = fb.impulse_response(i)?;
        let y = fft_convolve(x, &h);
        let d = fb.group_delay_samples(i);
        let mut e = vec![0.0; nf];
        for (t, et) in e.iter_mut().enumerate() {
            let s = t * hop + d;
            *et = (s..s + frame_len).map(|n| y.get(n).map_or(0.0, |v| v * v)).sum();
        }
        out.push(e);
    }
    Ok(out)
}

fn energies_to_image(e: Vec<Vec<f64>>, fb: &GammatoneFilterbank) -> Result<TimeFrequencyImage> {
    let channels = e.len();
    let frames = e.first().map_or(0, |r| r.len());
    let values = e.into_iter().flatten().map(|p| power_to_db(p, DEFAULT_FLOOR_DB)).collect();
    TimeFrequencyImage::new(channels, frames, values, fb.center_freqs.clone(), AxisKind::Gammatone, DEFAULT_FLOOR_DB)
}

/// Gammatonegram by explicit convolution with each channel's impulse response.
pub fn gammatonegram_direct(
    x: &[f64],
    fb: &GammatoneFilterbank,
    frame_len: usize,
    hop: usize,
) -> Result<TimeFrequencyImage> {
    energies_to_image(gammatone_energies(x, fb, frame_len, hop)?, fb)
}

/// Analysis settings of the weighted-spectrum approximation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FastGammatoneConfig {
    pub window_len: usize,
    pub fft_size: usize,
}

impl FastGammatoneConfig {
    /// A Hamming window of 2.5 frames, zero-padded to twice the next power of two.
    pub fn for_frame(frame_len: usize) -> Self {
        let window_len = ((frame_len as f64 * 2.5).round() as usize).max(2);
        Self { window_len, fft_size: window_len.next_power_of_two() * 2 }
    }
}

/// Channels x bins matrix of squared magnitude responses, normalised to 1 at
/// the centre frequency. Only the positive-frequency pole pair is kept, so
/// each row is symmetric about its centre and peaks at the nearest bin.
pub fn fast_weights(fb: &GammatoneFilterbank, fft_size: usize) -> Vec<Vec<f64>> {
    let bins = fft_size / 2 + 1;
    let df = fb.sample_rate / fft_size as f64;
    (0..fb.len())
        .map(|i| {
            let a2 = (2.0 * PI * fb.bandwidths[i]).powi(2);
            (0..bins)
                .map(|k| {
                    let w = 2.0 * PI * (k as f64 * df - fb.center_freqs[i]);
                    (a2 / (a2 + w * w)).powi(2)
                })
                .collect()
        })
        .collect()
}

/// Gammatonegram from a weighted power spectrum. Each frame is analysed with
/// a window centred on the same samples the direct method sums over, and
/// the result is scaled to the same energy units.
pub fn gammatonegram_fast(x: &[f64], fb: &GammatoneFilterbank, cfg: &StftConfig) -> Result<TimeFrequencyImage> {
    cfg.validate()?;
    let nf = cfg.frame_count(x.len())?;
    let fc = FastGammatoneConfig::for_frame(cfg.frame_len);
    let w = hamming_window(fc.window_len)?;
    let wsum: f64 = w.iter().map(|v| v * v).sum();
    let scale = 2.0 * cfg.frame_len as f64 / (fc.fft_size as f64 * wsum);
    let weights = fast_weights(fb, fc.fft_size);
    let fft = FftPlanner::new().plan_fft_forward(fc.fft_size);
    let bins = fc.fft_size / 2 + 1;
    let half = fc.window_len as isize / 2;
    let mut e = vec![vec![0.0; nf]; fb.len()];
    let mut buf = vec![Complex64::new(0.0, 0.0); fc.fft_size];
    let mut power = vec![0.0; bins];
    for t in 0..nf {
        let centre = (t * cfg.hop + cfg.frame_len / 2) as isize;
        buf.iter_mut().for_each(|c| *c = Complex64::new(0.0, 0.0));
        for (n, wn) in w.iter().enumerate() {
            let s = centre - half + n as isize;
            if s >= 0 && (s as usize) < x.len() {
                buf[n].re = x[s as usize] * wn;
            }
        }
        fft.process(&mut buf);
        for (p, c) in power.iter_mut().zip(&buf) {
            *p = c.norm_sqr();
        }
        for (i, row) in weights.iter().enumerate() {
            e[i][t] = scale * row.iter().zip(&power).map(|(a, b)| a * b).sum::<f64>();
        }
    }
    energies_to_image(e, fb).map_err(|e| match e {
        Error::Shape(m) => Error::Domain(m),
        other => other,
    })
}
