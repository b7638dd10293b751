use std::io::{Read, Seek, Write};

use crate::dsp::AudioClip;
use crate::error::{Error, Result};

/// Writes mono 16-bit PCM.
pub fn write_wav<W: Write + Seek>(w: W, clip: &AudioClip) -> Result<()> {
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: clip.sample_rate,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut wr = hound::WavWriter::new(w, spec)?;
    for &s in &clip.samples {
        wr.write_sample((s.clamp(-1.0, 1.0) * 32767.0).round() as i16)?;
    }
    wr.finalize()?;
    Ok(())
}

/// Reads mono 16-bit PCM; other layouts are rejected.
pub fn read_wav<R: Read>(r: R) -> Result<AudioClip> {
    let mut rd = hound::WavReader::new(r)?;
    let spec = rd.spec();
    if spec.channels != 1 || spec.bits_per_sample != 16 || spec.sample_format != hound::SampleFormat::Int {
        return Err(Error::Format("expected mono 16-bit PCM audio".into()));
    }
    let samples = rd
        .samples::<i16>()
        .map(|s| s.map(|v| (v as f64 / 32767.0).max(-1.0)).map_err(Into::into))
        .collect::<Result<Vec<f64>>>()?;
    AudioClip::new(samples, spec.sample_rate)
}
