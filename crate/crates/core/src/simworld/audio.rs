use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;

use super::traverse::Traverse;
use crate::dsp::AudioClip;
use crate::error::{Error, Result};
use crate::rng;
use crate::terrain::TerrainClass;

/// Nominal emphasis band (Hz) of each terrain's signature.
pub fn emphasis_band(c: TerrainClass) -> (f64, f64) {
    match c {
        TerrainClass::Asphalt => (300.0, 1500.0),
        TerrainClass::Grass => (2000.0, 5000.0),
        TerrainClass::Gravel => (6000.0, 12000.0),
    }
}

const EDGE_JITTER: f64 = 0.05;
const EMPHASIS_DB: (f64, f64) = (14.0, 22.0);
const WARMUP: usize = 4096;
const CROSSFADE_S: f64 = 0.01;

/// RBJ cookbook biquad, transposed direct form II.
#[derive(Clone, Copy, Debug)]
struct Biquad {
    b: [f64; 3],
    a: [f64; 2],
    z: [f64; 2],
}

impl Biquad {
    fn new(fc: f64, fs: f64, highpass: bool) -> Self {
        let w0 = 2.0 * PI * fc / fs;
        let alpha = w0.sin() / (2.0 * std::f64::consts::FRAC_1_SQRT_2);
        let cw = w0.cos();
        let a0 = 1.0 + alpha;
        let b = if highpass {
            [(1.0 + cw) / 2.0, -(1.0 + cw), (1.0 + cw) / 2.0]
        } else {
            [(1.0 - cw) / 2.0, 1.0 - cw, (1.0 - cw) / 2.0]
        };
        Self { b: [b[0] / a0, b[1] / a0, b[2] / a0], a: [-2.0 * cw / a0, (1.0 - alpha) / a0], z: [0.0; 2] }
    }

    fn process(&mut self, x: f64) -> f64 {
        let y = self.b[0] * x + self.z[0];
        self.z[0] = self.b[1] * x - self.a[0] * y + self.z[1];
        self.z[1] = self.b[2] * x - self.a[1] * y;
        y
    }
}

/// Fourth-order band-pass (two high-pass and two low-pass sections) with gain.
#[derive(Clone, Debug)]
struct Voice {
    stages: [Biquad; 4],
    gain: f64,
}

impl Voice {
    fn random<R: Rng + ?Sized>(c: TerrainClass, fs: f64, rng: &mut R) -> Self {
        let (lo, hi) = emphasis_band(c);
        let lo = lo * (1.0 + rng.random_range(-EDGE_JITTER..EDGE_JITTER));
        let hi = (hi * (1.0 + rng.random_range(-EDGE_JITTER..EDGE_JITTER))).min(0.45 * fs);
        let db = rng.random_range(EMPHASIS_DB.0..EMPHASIS_DB.1);
        let hp = Biquad::new(lo, fs, true);
        let lp = Biquad::new(hi, fs, false);
        Self { stages: [hp, hp, lp, lp], gain: 10f64.powf(db / 20.0) }
    }

    fn process(&mut self, x: f64) -> f64 {
        let y = self.stages.iter_mut().fold(x, |v, s| s.process(v));
        self.gain * y
    }
}

/// Slow amplitude modulation, mimicking speed and load variation.
#[derive(Clone, Copy, Debug)]
struct Modulation {
    rate: f64,
    depth: f64,
    phase: f64,
}

impl Modulation {
    fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Self { rate: rng.random_range(1.0..4.0), depth: rng.random_range(0.0..0.35), phase: rng.random_range(0.0..2.0 * PI) }
    }

    fn at(&self, t: f64) -> f64 {
        1.0 + self.depth * (2.0 * PI * self.rate * t + self.phase).sin()
    }
}

fn normalise(samples: &mut [f64], peak: f64) {
    let m = samples.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if m > 0.0 {
        let k = peak / m;
        samples.iter_mut().for_each(|v| *v *= k);
    }
}

/// Terrain signature: white noise with a boosted class-specific band,
/// random band edges, emphasis, amplitude modulation and level.
pub fn synth_audio(terrain: TerrainClass, duration_s: f64, sample_rate: u32, seed: u64) -> Result<AudioClip> {
    if !(duration_s > 0.0 && duration_s.is_finite()) {
        return Err(Error::Domain(format!("clip duration must be positive, got {}", duration_s)));
    }
    if sample_rate == 0 {
        return Err(Error::Domain("sample rate must be positive".into()));
    }
    let fs = sample_rate as f64;
    let n = (duration_s * fs).round() as usize;
    let mut rng = rng::stream(seed, terrain.name());
    let mut voice = Voice::random(terrain, fs, &mut rng);
    let am = Modulation::random(&mut rng);
    let level = rng.random_range(0.3..0.95);
    for _ in 0..WARMUP {
        let w: f64 = rng.sample(StandardNormal);
        voice.process(w);
    }
    let mut samples: Vec<f64> = (0..n)
        .map(|i| {
            let w: f64 = rng.sample(StandardNormal);
            (w + voice.process(w)) * am.at(i as f64 / fs)
        })
        .collect();
    normalise(&mut samples, level);
    AudioClip::new(samples, sample_rate)
}

/// Continuous microphone recording along a traverse. Each terrain keeps its
/// own filter state; mixing weights cross-fade over 10 ms at terrain changes.
/// Samples are quantised to 16-bit PCM levels so WAV round trips are exact.
pub fn synth_stream(traverse: &Traverse, sample_rate: u32, seed: u64) -> Result<AudioClip> {
    if traverse.samples.is_empty() {
        return Err(Error::Input("empty traverse".into()));
    }
    let fs = sample_rate as f64;
    let duration = traverse.duration() + traverse.dt;
    let n = (duration * fs).ceil() as usize;
    let mut rng = rng::stream(seed, "stream");
    let mut voices: Vec<Voice> = TerrainClass::ALL.iter().map(|&c| Voice::random(c, fs, &mut rng)).collect();
    let am = Modulation::random(&mut rng);
    let mut weights = [0.0f64; TerrainClass::COUNT];
    weights[traverse.samples[0].terrain.index()] = 1.0;
    let ramp = 1.0 / (CROSSFADE_S * fs);
    for _ in 0..WARMUP {
        let w: f64 = rng.sample(StandardNormal);
        voices.iter_mut().for_each(|v| {
            v.process(w);
        });
    }
    let mut samples = Vec::with_capacity(n);
    for i in 0..n {
        let t = i as f64 / fs;
        let k = ((t / traverse.dt).floor() as usize).min(traverse.samples.len() - 1);
        let active = traverse.samples[k].terrain.index();
        let w: f64 = rng.sample(StandardNormal);
        let mut y = w;
        for (c, v) in voices.iter_mut().enumerate() {
            let target = if c == active { 1.0 } else { 0.0 };
            let wc = &mut weights[c];
            *wc = if *wc < target { (*wc + ramp).min(target) } else { (*wc - ramp).max(target) };
            y += *wc * v.process(w);
        }
        samples.push(y * am.at(t));
    }
    normalise(&mut samples, 0.9);
    samples.iter_mut().for_each(|v| *v = (*v * 32767.0).round() / 32767.0);
    AudioClip::new(samples, sample_rate)
}
