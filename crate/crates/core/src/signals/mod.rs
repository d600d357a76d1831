//! Sampled-signal primitives: generators, zero-phase filters, auditory
//! filterbanks, envelopes, cross-correlation and smoothing.

mod analysis;
mod erb;
mod filter;
mod generate;
mod savgol;
pub mod wav;

pub use analysis::{convolve, envelope, ideal_octave_bands, normalized_xcorr, XCorr};
pub(crate) use analysis::{fft_len, FftPair};
pub use erb::{erb_bandwidth_hz, erb_centers, erb_filterbank, erb_number, erb_number_to_hz};
pub use filter::{bandpass, highpass, lowpass, octave_filterbank, ButterworthSos};
pub use generate::{
    build_stimulus, pink_noise, tone, white_burst, STIMULUS_BOUNDARIES_S, STIMULUS_DURATION_S,
};
pub use savgol::savitzky_golay;

use crate::error::{Error, Result};

/// Sample rate used throughout when nothing else is configured.
pub const DEFAULT_SAMPLE_RATE_HZ: u32 = 48_000;

/// A finite, real-valued, uniformly sampled signal.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSignal {
    sample_rate_hz: u32,
    samples: Vec<f64>,
}

impl SampledSignal {
    pub fn new(sample_rate_hz: u32, samples: Vec<f64>) -> Result<Self> {
        if sample_rate_hz == 0 {
            return Err(Error::invalid("sample rate must be positive"));
        }
        if let Some(i) = samples.iter().position(|s| !s.is_finite()) {
            return Err(Error::invalid(format!("sample {i} is not finite")));
        }
        Ok(Self {
            sample_rate_hz,
            samples,
        })
    }

    pub fn zeros(sample_rate_hz: u32, len: usize) -> Result<Self> {
        Self::new(sample_rate_hz, vec![0.0; len])
    }

    /// Internal constructor for outputs of finite arithmetic on finite
    /// inputs.
    pub(crate) fn from_parts(sample_rate_hz: u32, samples: Vec<f64>) -> Self {
        debug_assert!(samples.iter().all(|s| s.is_finite()));
        Self {
            sample_rate_hz,
            samples,
        }
    }

    pub fn sample_rate_hz(&self) -> u32 {
        self.sample_rate_hz
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / f64::from(self.sample_rate_hz)
    }

    pub fn nyquist_hz(&self) -> f64 {
        f64::from(self.sample_rate_hz) / 2.0
    }

    /// Sum of squared samples.
    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|s| s * s).sum()
    }

    pub fn rms(&self) -> f64 {
        if self.samples.is_empty() {
            0.0
        } else {
            (self.energy() / self.samples.len() as f64).sqrt()
        }
    }

    pub fn peak(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, s| m.max(s.abs()))
    }

    pub fn scaled(&self, gain: f64) -> Self {
        Self::from_parts(
            self.sample_rate_hz,
            self.samples.iter().map(|s| s * gain).collect(),
        )
    }

    /// Copy of `samples[start..end]`.
    pub fn slice(&self, start: usize, end: usize) -> Self {
        Self::from_parts(self.sample_rate_hz, self.samples[start..end].to_vec())
    }

    pub(crate) fn map_samples(&self, f: impl FnOnce(&[f64]) -> Vec<f64>) -> Self {
        Self::from_parts(self.sample_rate_hz, f(&self.samples))
    }
}

/// Left and right ear signals with matching rate and length.
#[derive(Debug, Clone, PartialEq)]
pub struct BinauralPair {
    left: SampledSignal,
    right: SampledSignal,
}

impl BinauralPair {
    pub fn new(left: SampledSignal, right: SampledSignal) -> Result<Self> {
        if left.sample_rate_hz != right.sample_rate_hz {
            return Err(Error::invalid(format!(
                "ear sample rates differ: {} vs {}",
                left.sample_rate_hz, right.sample_rate_hz
            )));
        }
        if left.len() != right.len() {
            return Err(Error::invalid(format!(
                "ear signal lengths differ: {} vs {}",
                left.len(),
                right.len()
            )));
        }
        Ok(Self { left, right })
    }

    /// Builds a pair, zero-padding the shorter channel.
    pub fn padded(left: SampledSignal, right: SampledSignal) -> Result<Self> {
        let n = left.len().max(right.len());
        let pad = |s: SampledSignal| {
            let rate = s.sample_rate_hz;
            let mut v = s.into_samples();
            v.resize(n, 0.0);
            SampledSignal::from_parts(rate, v)
        };
        Self::new(pad(left), pad(right))
    }

    pub fn left(&self) -> &SampledSignal {
        &self.left
    }

    pub fn right(&self) -> &SampledSignal {
        &self.right
    }

    pub fn sample_rate_hz(&self) -> u32 {
        self.left.sample_rate_hz
    }

    pub fn len(&self) -> usize {
        self.left.len()
    }

    pub fn is_empty(&self) -> bool {
        self.left.is_empty()
    }

    pub fn into_parts(self) -> (SampledSignal, SampledSignal) {
        (self.left, self.right)
    }

    pub fn scaled(&self, gain: f64) -> Self {
        Self {
            left: self.left.scaled(gain),
            right: self.right.scaled(gain),
        }
    }

    /// Channels exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            left: self.right.clone(),
            right: self.left.clone(),
        }
    }

    pub fn peak(&self) -> f64 {
        self.left.peak().max(self.right.peak())
    }
}

pub(crate) fn check_cutoff(cutoff_hz: f64, rate: u32) -> Result<()> {
    let nyquist = f64::from(rate) / 2.0;
    if !(cutoff_hz.is_finite() && cutoff_hz > 0.0 && cutoff_hz < nyquist) {
        return Err(Error::invalid(format!(
            "cutoff {cutoff_hz} Hz outside (0, {nyquist}) Hz"
        )));
    }
    Ok(())
}

/// Rescales so the largest absolute sample equals one (no-op on silence).
pub(crate) fn peak_normalize(v: &mut [f64]) {
    let peak = v.iter().fold(0.0f64, |m, s| m.max(s.abs()));
    if peak > 0.0 {
        v.iter_mut().for_each(|s| *s /= peak);
    }
}

/// Number of samples for a duration, rounded to the nearest sample.
pub(crate) fn samples_for(duration_s: f64, rate: u32) -> usize {
    (duration_s * f64::from(rate)).round() as usize
}
