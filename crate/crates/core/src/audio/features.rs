use serde::{Deserialize, Serialize};

use crate::dsp::{
    gammatonegram_fast, mel_spectrogram, spectrogram, AudioClip, GammatoneFilterbank, StftConfig, TimeFrequencyImage,
};
use crate::error::{Error, Result};
use crate::numeric::Tensor;

/// Length of one classified clip.
pub const CLIP_SECONDS: f64 = 0.5;
pub const MEL_CHANNELS: usize = 40;
pub const GAMMATONE_CHANNELS: usize = 32;
pub const GAMMATONE_FMIN: f64 = 200.0;
pub const GAMMATONE_FMAX: f64 = 20_000.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Representation {
    Spectrogram,
    Mel,
    Gammatonegram,
}

impl Representation {
    pub const ALL: [Representation; 3] = [Representation::Spectrogram, Representation::Mel, Representation::Gammatonegram];

    pub fn name(self) -> &'static str {
        match self {
            Representation::Spectrogram => "spectrogram",
            Representation::Mel => "mel",
            Representation::Gammatonegram => "gammatonegram",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown representation {:?}", s)))
    }
}

/// Turns clips into time-frequency images of one representation.
#[derive(Clone, Debug)]
pub struct FeatureExtractor {
    pub representation: Representation,
    pub sample_rate: u32,
    pub stft: StftConfig,
    gammatone: Option<GammatoneFilterbank>,
}

impl FeatureExtractor {
    pub fn new(representation: Representation, sample_rate: u32) -> Result<Self> {
        let stft = StftConfig::for_rate(sample_rate);
        stft.validate()?;
        let gammatone = match representation {
            Representation::Gammatonegram => Some(GammatoneFilterbank::erb_spaced(
                GAMMATONE_CHANNELS,
                GAMMATONE_FMIN,
                GAMMATONE_FMAX.min(0.45 * sample_rate as f64),
                sample_rate as f64,
            )?),
            _ => None,
        };
        Ok(Self { representation, sample_rate, stft, gammatone })
    }

    pub fn clip_samples(&self) -> usize {
        (CLIP_SECONDS * self.sample_rate as f64).round() as usize
    }

    pub fn extract(&self, clip: &AudioClip) -> Result<TimeFrequencyImage> {
        if clip.sample_rate != self.sample_rate {
            return Err(Error::Domain(format!(
                "clip at {} Hz given to a {} Hz extractor",
                clip.sample_rate, self.sample_rate
            )));
        }
        let fs = self.sample_rate as f64;
        match self.representation {
            Representation::Spectrogram => spectrogram(&clip.samples, fs, &self.stft),
            Representation::Mel => mel_spectrogram(&clip.samples, fs, &self.stft, MEL_CHANNELS),
            Representation::Gammatonegram => {
                gammatonegram_fast(&clip.samples, self.gammatone.as_ref().expect("filterbank built"), &self.stft)
            }
        }
    }

    /// `[1, channels, frames]` of the network input for one clip.
    pub fn input_shape(&self) -> Result<[usize; 3]> {
        let channels = match self.representation {
            Representation::Spectrogram => self.stft.bins(),
            Representation::Mel => MEL_CHANNELS,
            Representation::Gammatonegram => GAMMATONE_CHANNELS,
        };
        Ok([1, channels, self.stft.frame_count(self.clip_samples())?])
    }

    /// Extracts and standardises one clip into a network input.
    pub fn tensor(&self, clip: &AudioClip) -> Result<Tensor> {
        standardize(&self.extract(clip)?)
    }
}

/// Zero-mean, unit-variance copy of an image as a `[1, channels, frames]`
/// tensor. A constant image maps to zeros.
pub fn standardize(img: &TimeFrequencyImage) -> Result<Tensor> {
    let n = img.values.len() as f64;
    let mean = img.values.iter().sum::<f64>() / n;
    let var = img.values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let sd = var.sqrt();
    let data = if sd > 0.0 { img.values.iter().map(|v| (v - mean) / sd).collect() } else { vec![0.0; img.values.len()] };
    Tensor::from_vec(&[1, img.channels, img.frames], data)
}
