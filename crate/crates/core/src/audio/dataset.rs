use serde::{Deserialize, Serialize};

use super::features::{FeatureExtractor, Representation, CLIP_SECONDS};
use crate::dsp::AudioClip;
use crate::error::{Error, Result};
use crate::numeric::Tensor;
use crate::rng;
use crate::simworld::synth_audio;
use crate::terrain::TerrainClass;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

/// Audio recorded while driving over a single terrain.
#[derive(Clone, Debug)]
pub struct Recording {
    pub terrain: TerrainClass,
    pub clip: AudioClip,
}

#[derive(Clone, Debug)]
pub struct AudioDataset {
    pub representation: Representation,
    pub split: Split,
    pub images: Vec<Tensor>,
    pub labels: Vec<TerrainClass>,
    /// Recordings too short to hold a single clip.
    pub skipped: usize,
}

impl AudioDataset {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn class_counts(&self) -> [usize; TerrainClass::COUNT] {
        let mut c = [0; TerrainClass::COUNT];
        self.labels.iter().for_each(|l| c[l.index()] += 1);
        c
    }
}

/// Slices each recording into 0.5 s clips every `hop_s` seconds and
/// extracts standardised images. Clips never span two recordings.
pub fn build_dataset(
    recordings: &[Recording],
    extractor: &FeatureExtractor,
    hop_s: f64,
    split: Split,
) -> Result<AudioDataset> {
    if recordings.is_empty() {
        return Err(Error::Dataset("no recordings".into()));
    }
    if !(hop_s > 0.0) {
        return Err(Error::Config(format!("clip hop must be positive, got {}", hop_s)));
    }
    let len = extractor.clip_samples();
    let hop = (hop_s * extractor.sample_rate as f64).round().max(1.0) as usize;
    let mut images = Vec::new();
    let mut labels = Vec::new();
    let mut skipped = 0;
    for rec in recordings {
        if rec.clip.len() < len {
            skipped += 1;
            continue;
        }
        let mut start = 0;
        while start + len <= rec.clip.len() {
            images.push(extractor.tensor(&rec.clip.window(start, len)?)?);
            labels.push(rec.terrain);
            start += hop;
        }
    }
    if skipped > 0 {
        log::warn!("skipped {} recordings shorter than {} s", skipped, CLIP_SECONDS);
    }
    let ds = AudioDataset { representation: extractor.representation, split, images, labels, skipped };
    let counts = ds.class_counts();
    let present: Vec<usize> = counts.iter().copied().filter(|&c| c > 0).collect();
    if present.len() < 2 {
        return Err(Error::Dataset(format!("need at least two terrain classes, got counts {:?}", counts)));
    }
    let (lo, hi) = (*present.iter().min().unwrap(), *present.iter().max().unwrap());
    if hi as f64 > 1.1 * lo as f64 {
        return Err(Error::Dataset(format!("classes unbalanced beyond 10%: {:?}", counts)));
    }
    Ok(ds)
}

/// Layout of a synthetic per-terrain recording campaign.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CampaignConfig {
    pub train_seconds: f64,
    pub test_seconds: f64,
    pub microphones: usize,
    /// Each recording is split into sessions with their own signature jitter.
    pub session_seconds: f64,
    pub clip_hop: f64,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        Self { train_seconds: 160.0, test_seconds: 40.0, microphones: 2, session_seconds: 20.0, clip_hop: 0.5 }
    }
}

/// Per-terrain recordings for every class, each microphone independent.
pub fn record_campaign(seconds: f64, cfg: &CampaignConfig, sample_rate: u32, seed: u64) -> Result<Vec<Recording>> {
    if !(cfg.session_seconds >= CLIP_SECONDS) || cfg.microphones == 0 {
        return Err(Error::Config("sessions must hold a clip and at least one microphone is needed".into()));
    }
    let sessions = (seconds / cfg.session_seconds).ceil() as usize;
    let mut out = Vec::new();
    for c in TerrainClass::ALL {
        for mic in 0..cfg.microphones {
            for s in 0..sessions {
                let dur = (seconds - s as f64 * cfg.session_seconds).min(cfg.session_seconds);
                let sseed = rng::derive_seed(seed, &format!("{}-{}-{}", c.name(), mic, s));
                out.push(Recording { terrain: c, clip: synth_audio(c, dur, sample_rate, sseed)? });
            }
        }
    }
    Ok(out)
}
