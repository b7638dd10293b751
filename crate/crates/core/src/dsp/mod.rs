//! Time-frequency features: spectrograms, mel spectrograms and gammatonegrams.

pub mod clip;
pub mod gammatone;
pub mod image;
pub mod mel;
pub mod stft;
pub mod window;

pub use clip::AudioClip;
pub use gammatone::{erb_bandwidth, gammatone_ir, gammatonegram_direct, gammatonegram_fast, GammatoneFilterbank};
pub use image::{AxisKind, TimeFrequencyImage};
pub use mel::{mel_frequency, mel_spectrogram, MelFilterbank};
pub use stft::{log_power, spectrogram, stft, StftConfig, DEFAULT_FLOOR_DB};
pub use window::{hamming_window, WindowKind};
