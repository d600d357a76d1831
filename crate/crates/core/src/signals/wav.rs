//! 16-bit PCM WAV input and output.

use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};

use super::{BinauralPair, SampledSignal};
use crate::error::{Error, Result};

const FULL_SCALE: f64 = 32_767.0;

fn quantize(v: f64) -> i16 {
    (v * FULL_SCALE).round().clamp(-32_768.0, 32_767.0) as i16
}

fn spec(channels: u16, rate: u32) -> WavSpec {
    WavSpec {
        channels,
        sample_rate: rate,
        bits_per_sample: 16,
        sample_format: SampleFormat::Int,
    }
}

/// Writes a mono 16-bit file. Samples are clamped to `[-1, 1]`.
pub fn write_mono(path: &Path, s: &SampledSignal) -> Result<()> {
    let mut w = WavWriter::create(path, spec(1, s.sample_rate_hz()))?;
    for &v in s.samples() {
        w.write_sample(quantize(v))?;
    }
    w.finalize()?;
    Ok(())
}

/// Writes an interleaved stereo 16-bit file (left first).
pub fn write_stereo(path: &Path, pair: &BinauralPair) -> Result<()> {
    let mut w = WavWriter::create(path, spec(2, pair.sample_rate_hz()))?;
    for (l, r) in pair.left().samples().iter().zip(pair.right().samples()) {
        w.write_sample(quantize(*l))?;
        w.write_sample(quantize(*r))?;
    }
    w.finalize()?;
    Ok(())
}

fn read_channels(path: &Path) -> Result<(u32, Vec<Vec<f64>>)> {
    let mut r = WavReader::open(path)?;
    let spec = r.spec();
    let channels = usize::from(spec.channels);
    let raw: Vec<f64> = match spec.sample_format {
        SampleFormat::Int => {
            let scale = f64::from(1u32 << (spec.bits_per_sample - 1));
            r.samples::<i32>()
                .map(|s| s.map(|v| f64::from(v) / scale))
                .collect::<Result<_, _>>()?
        }
        SampleFormat::Float => r
            .samples::<f32>()
            .map(|s| s.map(f64::from))
            .collect::<Result<_, _>>()?,
    };
    let mut out = vec![Vec::with_capacity(raw.len() / channels); channels];
    for frame in raw.chunks_exact(channels) {
        for (c, v) in frame.iter().enumerate() {
            out[c].push(*v);
        }
    }
    Ok((spec.sample_rate, out))
}

/// Reads a mono file into `[-1, 1]` samples.
pub fn read_mono(path: &Path) -> Result<SampledSignal> {
    let (rate, mut ch) = read_channels(path)?;
    if ch.len() != 1 {
        return Err(Error::invalid(format!(
            "{}: expected a mono file, found {} channels",
            path.display(),
            ch.len()
        )));
    }
    SampledSignal::new(rate, ch.remove(0))
}

/// Reads a two-channel file as (left, right).
pub fn read_stereo(path: &Path) -> Result<BinauralPair> {
    let (rate, mut ch) = read_channels(path)?;
    if ch.len() != 2 {
        return Err(Error::invalid(format!(
            "{}: expected a stereo file, found {} channels",
            path.display(),
            ch.len()
        )));
    }
    let right = ch.pop().unwrap_or_default();
    let left = ch.pop().unwrap_or_default();
    BinauralPair::new(SampledSignal::new(rate, left)?, SampledSignal::new(rate, right)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mono_round_trip_within_quantization() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.wav");
        let s = SampledSignal::new(48_000, vec![0.0, 0.5, -0.5, 1.0, -1.0, 0.123]).unwrap();
        write_mono(&path, &s).unwrap();
        let back = read_mono(&path).unwrap();
        assert_eq!(back.sample_rate_hz(), 48_000);
        for (a, b) in s.samples().iter().zip(back.samples()) {
            assert!((a - b).abs() < 1.0 / 16_000.0);
        }
        assert!(read_stereo(&path).is_err());
    }

    #[test]
    fn stereo_round_trip_keeps_channel_order() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ir.wav");
        let pair = BinauralPair::new(
            SampledSignal::new(44_100, vec![0.5, 0.0]).unwrap(),
            SampledSignal::new(44_100, vec![0.0, -0.25]).unwrap(),
        )
        .unwrap();
        write_stereo(&path, &pair).unwrap();
        let back = read_stereo(&path).unwrap();
        assert!(back.left().samples()[0] > 0.49);
        assert!(back.right().samples()[1] < -0.24);
    }
}
